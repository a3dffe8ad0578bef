#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"
#include "trustfs/error.hpp"
#include "trustfs/tensor.hpp"

using namespace trustfs;
using trustfs::testing::random_matrix;

namespace {

Tensor3 two_slice_tensor() {
  Tensor3 z(2, 2, 2);
  z.set_slice(0, (Matrix(2, 2) << 1, 2, 3, 4).finished());
  z.set_slice(1, (Matrix(2, 2) << 5, 6, 7, 8).finished());
  return z;
}

}  // namespace

TEST(KhatriRao, HandExample) {
  Matrix a(2, 2), b(2, 2), expected(4, 2);
  a << 1, 2, 3, 4;
  b << 0, 1, 1, 0;
  expected << 0, 2, 1, 0, 0, 4, 3, 0;
  EXPECT_EQ(khatri_rao(a, b), expected);
}

TEST(KhatriRao, OnesRowIsIdentity) {
  std::mt19937_64 rng(1);
  const Matrix a = random_matrix(3, 4, rng);
  EXPECT_EQ(khatri_rao(a, Matrix::Ones(1, 4)), a);
}

TEST(KhatriRao, ZeroAnnihilates) {
  std::mt19937_64 rng(2);
  EXPECT_TRUE(khatri_rao(Matrix::Zero(2, 3), random_matrix(4, 3, rng)).isZero(0.0));
}

TEST(KhatriRao, ColumnCountMismatchThrows) {
  EXPECT_THROW(khatri_rao(Matrix::Ones(2, 2), Matrix::Ones(2, 3)), Error);
}

TEST(Unfold, HandExampleModes) {
  const Tensor3 z = two_slice_tensor();
  Matrix mode1(2, 4), mode3(2, 4);
  mode1 << 1, 2, 5, 6, 3, 4, 7, 8;
  mode3 << 1, 3, 2, 4, 5, 7, 6, 8;
  EXPECT_EQ(unfold(z, 1), mode1);
  EXPECT_EQ(unfold(z, 3), mode3);
  EXPECT_EQ(unfold(z, 2), trustfs::testing::unfold_ref(z, 2));
}

TEST(Unfold, Singleton) {
  Tensor3 z(1, 1, 1);
  z(0, 0, 0) = 3.5;
  for (int mode = 1; mode <= 3; ++mode) EXPECT_EQ(unfold(z, mode), Matrix::Constant(1, 1, 3.5));
}

TEST(Unfold, FoldRoundTrip) {
  std::mt19937_64 rng(3);
  Tensor3 z(3, 4, 2);
  for (Eigen::Index k = 0; k < 2; ++k) z.set_slice(k, random_matrix(3, 4, rng));
  for (int mode = 1; mode <= 3; ++mode) {
    const Tensor3 back = fold(unfold(z, mode), mode, z.dims());
    for (Eigen::Index k = 0; k < 2; ++k) EXPECT_EQ(back.slice(k), z.slice(k));
  }
}

TEST(Unfold, InvalidModeThrows) { EXPECT_THROW(unfold(two_slice_tensor(), 4), Error); }

TEST(CpReconstruct, RankOneOuterProduct) {
  Matrix a(2, 1), h(2, 1), p(1, 1);
  a << 1, 2;
  h << 1, 1;
  p << 1;
  const Tensor3 z = cp_reconstruct(a, h, p);
  EXPECT_EQ(z.slice(0), (Matrix(2, 2) << 1, 1, 2, 2).finished());
}

TEST(CpReconstruct, MatchesUnfoldingIdentities) {
  std::mt19937_64 rng(4);
  const Matrix a = random_matrix(3, 2, rng), h = random_matrix(5, 2, rng), p = random_matrix(4, 2, rng);
  const Tensor3 z = cp_reconstruct(a, h, p);
  EXPECT_LE((unfold(z, 1) - a * khatri_rao(p, h).transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((unfold(z, 2) - h * khatri_rao(p, a).transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((unfold(z, 3) - p * khatri_rao(h, a).transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CpReconstruct, ZeroFactorGivesZero) {
  std::mt19937_64 rng(5);
  const Tensor3 z = cp_reconstruct(random_matrix(2, 2, rng), Matrix::Zero(3, 2), random_matrix(2, 2, rng));
  EXPECT_EQ(z.frobenius_norm(), 0.0);
}

TEST(StackWeighted, UniformGammaTwoScalesByOmega) {
  std::mt19937_64 rng(6);
  std::vector<Matrix> slices{random_matrix(2, 3, rng), random_matrix(2, 3, rng), random_matrix(2, 3, rng)};
  const Tensor3 z = stack_weighted(slices, Vector::Constant(3, 1.0 / 3.0), 2.0);
  for (Eigen::Index k = 0; k < 3; ++k) {
    EXPECT_LE((z.slice(k) - slices[static_cast<std::size_t>(k)] / 3.0).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(StackWeighted, ZeroWeightAnnihilates) {
  std::vector<Matrix> slices(3, Matrix::Ones(2, 2));
  const Tensor3 z = stack_weighted(slices, (Vector(3) << 1, 0, 0).finished(), 3.0);
  EXPECT_EQ(z.slice(0), Matrix::Ones(2, 2));
  EXPECT_TRUE(z.slice(1).isZero(0.0));
  EXPECT_TRUE(z.slice(2).isZero(0.0));
}

TEST(StackWeighted, HandPowers) {
  std::vector<Matrix> slices(2, Matrix::Ones(1, 1));
  const Tensor3 z = stack_weighted(slices, (Vector(2) << 0.25, 0.75).finished(), 4.0);
  EXPECT_DOUBLE_EQ(z(0, 0, 0), 0.0625);
  EXPECT_DOUBLE_EQ(z(0, 0, 1), 0.5625);
}

TEST(StackWeighted, RejectsNonSimplexWeights) {
  std::vector<Matrix> slices(2, Matrix::Ones(1, 1));
  EXPECT_THROW(stack_weighted(slices, (Vector(2) << 0.5, 0.6).finished(), 2.0), Error);
}
