#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "support/oracles.hpp"
#include "trustfs/graph.hpp"

using namespace trustfs;
using trustfs::testing::random_graph;
using trustfs::testing::random_matrix;

TEST(KnnGraph, EquidistantPointsGetUniformWeights) {
  Matrix x = Matrix::Identity(3, 3);  // pairwise distances all equal
  const SimilarityGraph g = knn_graph(x, 2);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(g.weights(j, i), i == j ? 0.0 : 0.5);
  }
}

TEST(KnnGraph, TopOneIsIndicator) {
  Matrix x(1, 4);
  x << 0, 1, 3, 7;
  const SimilarityGraph g = knn_graph(x, 1);
  const std::vector<Eigen::Index> nearest{1, 0, 1, 2};
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(g.weights(nearest[static_cast<std::size_t>(i)], i), 1.0);
    EXPECT_DOUBLE_EQ(g.weights.col(i).sum(), 1.0);
  }
}

TEST(KnnGraph, HandWeightsOnALine) {
  Matrix x(1, 4);
  x << 0, 1, 2, 10;
  const SimilarityGraph g = knn_graph(x, 2);
  // Squared distances from point 0: 1, 4, 100; d_{k+1} = 100.
  const double w1 = (100.0 - 1.0) / (2 * 100.0 - 5.0);
  const double w2 = (100.0 - 4.0) / (2 * 100.0 - 5.0);
  EXPECT_NEAR(g.weights(1, 0), w1, 1e-15);
  EXPECT_NEAR(g.weights(2, 0), w2, 1e-15);
  EXPECT_GT(g.weights(1, 0), g.weights(2, 0));
  EXPECT_NEAR(g.weights.col(0).sum(), 1.0, 1e-15);
  EXPECT_EQ(g.weights(3, 0), 0.0);
}

TEST(KnnGraph, InvariantsOnRandomData) {
  std::mt19937_64 rng(3);
  const SimilarityGraph g = knn_graph(random_matrix(5, 30, rng), 5);
  EXPECT_LE(g.constraint_violation(), 1e-12);
  for (Eigen::Index i = 0; i < 30; ++i) EXPECT_EQ((g.weights.col(i).array() > 0).count(), 5);
}

TEST(Laplacian, TwoNodeHandExample) {
  SimilarityGraph s{(Matrix(2, 2) << 0, 1, 1, 0).finished()};
  const LaplacianPair l = laplacian(s);
  EXPECT_EQ(l.degree, Vector::Ones(2));
  EXPECT_EQ(l.laplacian, (Matrix(2, 2) << 1, -1, -1, 1).finished());
}

TEST(Laplacian, ZeroGraph) {
  EXPECT_TRUE(laplacian(SimilarityGraph{Matrix::Zero(3, 3)}).laplacian.isZero(0.0));
}

TEST(Laplacian, NullVectorAndPsd) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix l = laplacian(SimilarityGraph{random_graph(8, rng)}).laplacian;
    EXPECT_NEAR((Vector::Ones(8).transpose() * l * Vector::Ones(8))(0), 0.0, 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(l);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(Laplacian, TraceEqualsHalfPairwiseSum) {
  std::mt19937_64 rng(5);
  const Matrix s = random_graph(6, rng);
  const Matrix h = random_matrix(6, 3, rng);
  const double trace = (h.transpose() * laplacian(SimilarityGraph{s}).laplacian * h).trace();
  double pairwise = 0.0;
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) pairwise += 0.5 * s(i, j) * trustfs::testing::sq_dist_rows(h, i, j);
  }
  EXPECT_NEAR(trace, pairwise, 1e-12);
}

TEST(PairwisePenalty, HandAndSymmetry) {
  const Matrix f = pairwise_penalty(Matrix::Identity(2, 2), Matrix::Zero(2, 1));
  EXPECT_DOUBLE_EQ(f(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(f(0, 0), 0.0);
  EXPECT_TRUE(pairwise_penalty(Matrix::Ones(3, 4), Matrix::Ones(4, 2)).isZero(1e-14));
  std::mt19937_64 rng(6);
  const Matrix g = pairwise_penalty(random_matrix(4, 9, rng), random_matrix(9, 3, rng));
  EXPECT_LE((g - g.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ProjectSimplexZero, HandExamples) {
  const Vector a = project_simplex_zero((Vector(3) << 0.2, 0.3, 0.1).finished(), 0);
  EXPECT_NEAR(a(0), 0.0, 0.0);
  EXPECT_NEAR(a(1), 0.6, 1e-15);
  EXPECT_NEAR(a(2), 0.4, 1e-15);
  const Vector b = project_simplex_zero(Vector::Constant(3, -5.0), 0);
  EXPECT_EQ(b, (Vector(3) << 0, 0.5, 0.5).finished());
  const Vector feasible = (Vector(4) << 0.1, 0.0, 0.6, 0.3).finished();
  EXPECT_LE((project_simplex_zero(feasible, 1) - feasible).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ProjectSimplexZero, KktConditions) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vector q(10);
    for (Eigen::Index i = 0; i < 10; ++i) q(i) = gauss(rng);
    const Eigen::Index zero = trial % 10;
    const Vector s = project_simplex_zero(q, zero);
    EXPECT_EQ(s(zero), 0.0);
    EXPECT_NEAR(s.sum(), 1.0, 1e-12);
    // s_i = max(q_i - theta, 0) for one threshold theta.
    double theta = 0.0;
    for (Eigen::Index i = 0; i < 10; ++i) {
      if (i != zero && s(i) > 0) theta = q(i) - s(i);
    }
    for (Eigen::Index i = 0; i < 10; ++i) {
      if (i == zero) continue;
      EXPECT_NEAR(s(i), std::max(q(i) - theta, 0.0), 1e-12);
    }
  }
}

TEST(SimilarityUpdate, FeasibleTargetIsKept) {
  // View 0 puts all belief on view 1, view 1 none on view 0, no penalty:
  // Q = S^(1), which is already feasible.
  std::mt19937_64 rng(8);
  std::vector<SimilarityGraph> graphs{{random_graph(5, rng)}, {random_graph(5, rng)}};
  Matrix b = Matrix::Zero(2, 2);
  b(0, 1) = 1.0;
  const SimilarityGraph out = update_similarity(0, graphs, b, Matrix::Zero(5, 5));
  EXPECT_LE((out.weights - graphs[1].weights).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SimilarityUpdate, PenaltyDominatesWithoutBelief) {
  std::vector<SimilarityGraph> graphs{{Matrix::Zero(3, 3)}, {Matrix::Zero(3, 3)}};
  Matrix f(3, 3);
  f << 0, 100, 300, 100, 0, 500, 300, 500, 0;
  const SimilarityGraph out = update_similarity(0, graphs, Matrix::Zero(2, 2), f);
  EXPECT_DOUBLE_EQ(out.weights(1, 0), 1.0);  // argmin of F over j != 0
  EXPECT_DOUBLE_EQ(out.weights(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(out.weights(0, 2), 1.0);
  EXPECT_LE(out.constraint_violation(), 1e-12);
}

TEST(SimilarityUpdate, TargetMatchesFormula) {
  std::mt19937_64 rng(9);
  const Eigen::Index n = 4;
  std::vector<SimilarityGraph> graphs{{random_graph(n, rng)}, {random_graph(n, rng)}, {random_graph(n, rng)}};
  Matrix b(3, 3);
  b << 0, 0.2, 0.3, 0.1, 0, 0.4, 0.25, 0.35, 0;
  const Matrix f = random_matrix(n, n, rng);
  const std::size_t v = 1;
  // Q = (sum_k b_vk S^k + sum_k b_kv (S^k - sum_{t != k, v} b_kt S^t) - F/2) / (1 + sum_k b_kv^2)
  Matrix num = -0.5 * f;
  double den = 1.0;
  for (std::size_t k = 0; k < 3; ++k) {
    if (k == v) continue;
    const auto ki = static_cast<Eigen::Index>(k), vi = static_cast<Eigen::Index>(v);
    num += b(vi, ki) * graphs[k].weights;
    Matrix r = graphs[k].weights;
    for (std::size_t t = 0; t < 3; ++t) {
      if (t != k && t != v) r -= b(ki, static_cast<Eigen::Index>(t)) * graphs[t].weights;
    }
    num += b(ki, vi) * r;
    den += b(ki, vi) * b(ki, vi);
  }
  EXPECT_LE((similarity_target(v, graphs, b, f) - num / den).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(GraphTerms, VanishingCases) {
  std::mt19937_64 rng(10);
  const Matrix s = random_graph(5, rng);
  std::vector<SimilarityGraph> graphs{{s}, {s}, {s}};
  std::vector<Matrix> xhats(3, Matrix::Ones(2, 5));
  Matrix b = Matrix::Constant(3, 3, 0.5);
  b.diagonal().setZero();
  const GraphTerms t = graph_objective_terms(graphs, xhats, Matrix::Ones(5, 2), b);
  EXPECT_NEAR(t.smoothness, 0.0, 1e-13);
  EXPECT_NEAR(t.consensus, 0.0, 1e-13);
}
