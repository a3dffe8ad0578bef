#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "trustfs/csv.hpp"
#include "trustfs/dataset.hpp"
#include "trustfs/error.hpp"
#include "trustfs/selection.hpp"

using namespace trustfs;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("trustfs_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

MultiViewDataset toy(std::size_t views = 2, Eigen::Index d = 3, Eigen::Index n = 4) {
  std::vector<Matrix> xs;
  for (std::size_t v = 0; v < views; ++v) {
    Matrix x(d, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) x(i, j) = static_cast<double>(v * 100 + static_cast<std::size_t>(i * n + j));
    }
    xs.push_back(x);
  }
  return MultiViewDataset(xs, {});
}

}  // namespace

TEST(Dataset, DefaultMasksAreOnes) {
  const MultiViewDataset d = toy();
  EXPECT_EQ(d.num_views(), 2u);
  EXPECT_EQ(d.num_samples(), 4);
  EXPECT_TRUE(d.is_complete());
}

TEST(Dataset, SampleCountMismatch) {
  try {
    MultiViewDataset(std::vector<Matrix>{Matrix::Ones(3, 4), Matrix::Ones(3, 5)}, {});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShapeMismatch);
    EXPECT_NE(std::string(e.what()).find("sample count mismatch"), std::string::npos);
  }
}

TEST(Dataset, RejectsFullyMissingSample) {
  Mask m = Mask::Ones(2, 3);
  m.col(1).setZero();
  std::vector<Mask> masks{m, m};
  EXPECT_THROW(MultiViewDataset({Matrix::Ones(2, 3), Matrix::Ones(2, 3)}, masks), Error);
}

TEST(Dataset, SaveLoadRoundTripIsBitExact) {
  const fs::path dir = scratch_dir("roundtrip");
  MultiViewDataset base = toy();
  std::vector<Matrix> xs = base.views();
  xs[0](1, 1) = 0.1 + 0.2;  // not representable with few digits
  std::vector<Mask> masks = base.masks();
  masks[0](1, 1) = 0;
  xs[0](1, 1) = 0.0;
  xs[1](2, 3) = 1.0 / 3.0;
  const MultiViewDataset d(xs, masks, std::vector<int>{0, 1, 0, 1});
  save_dataset(d, dir);
  const MultiViewDataset back = load_dataset(dir);
  ASSERT_EQ(back.num_views(), 2u);
  for (std::size_t v = 0; v < 2; ++v) {
    EXPECT_EQ(back.view(v), d.view(v));
    EXPECT_EQ(back.mask(v), d.mask(v));
  }
  EXPECT_EQ(back.mask(0)(1, 1), 0);
  EXPECT_EQ(back.mask(0).cast<int>().sum(), 11);
  EXPECT_EQ(*back.labels(), *d.labels());
}

TEST(Dataset, LoadWithoutMasksAndMismatch) {
  const fs::path dir = scratch_dir("load");
  csv::write_text(dir / "meta.json", R"({"views": 2})");
  csv::write_matrix(dir / "view_1.csv", Matrix::Ones(3, 4));
  csv::write_matrix(dir / "view_2.csv", Matrix::Ones(3, 4));
  const MultiViewDataset d = load_dataset(dir);
  EXPECT_EQ(d.num_samples(), 4);
  EXPECT_TRUE(d.is_complete());
  csv::write_matrix(dir / "view_2.csv", Matrix::Ones(3, 5));
  EXPECT_THROW(load_dataset(dir), Error);
}

TEST(Normalize, HandMinMax) {
  Matrix x(1, 3);
  x << 2, 4, 6;
  const MultiViewDataset d = normalize_views(MultiViewDataset({x, Matrix::Constant(1, 3, 7.0)}, {}));
  EXPECT_EQ(d.view(0), (Matrix(1, 3) << 0, 0.5, 1).finished());
  EXPECT_EQ(d.view(1), Matrix::Constant(1, 3, 0.5));
}

TEST(Normalize, IgnoresMissingCellsAndIsIdempotent) {
  Matrix x(1, 4);
  x << 2, 100, 4, 6;
  Mask m(1, 4);
  m << 1, 0, 1, 1;
  const MultiViewDataset d = normalize_views(MultiViewDataset({x, Matrix::Ones(1, 4)}, {m, Mask::Ones(1, 4)}));
  EXPECT_DOUBLE_EQ(d.view(0)(0, 3), 1.0);
  EXPECT_EQ(d.view(0)(0, 1), 0.0);
  const MultiViewDataset again = normalize_views(d);
  EXPECT_EQ(again.view(0), d.view(0));
}

TEST(InjectMissing, ExactCountAndDeterminism) {
  const MultiViewDataset d({Matrix::Ones(10, 10), Matrix::Ones(10, 10)}, {});
  const MultiViewDataset a = inject_missing(d, 0.5, 7);
  const MultiViewDataset b = inject_missing(d, 0.5, 7);
  EXPECT_EQ(a.missing_count(), 100u);
  for (std::size_t v = 0; v < 2; ++v) EXPECT_EQ(a.mask(v), b.mask(v));
  EXPECT_TRUE(inject_missing(d, 0.0, 7).is_complete());
}

TEST(InjectMissing, SingleViewHalf) {
  const MultiViewDataset d({Matrix::Ones(10, 10), Matrix::Ones(1, 10)}, {});
  const MultiViewDataset a = inject_missing(d, 0.5, 3, MissingOptions{true, 100});
  EXPECT_EQ(static_cast<int>(100 - a.mask(0).cast<int>().sum()), 50);
}

TEST(InjectMissing, MissingCellsAreZeroed) {
  const MultiViewDataset d({Matrix::Constant(4, 6, 2.0), Matrix::Constant(4, 6, 3.0)}, {});
  const MultiViewDataset a = inject_missing(d, 0.4, 11);
  for (std::size_t v = 0; v < 2; ++v) {
    for (Eigen::Index j = 0; j < 6; ++j) {
      for (Eigen::Index i = 0; i < 4; ++i) {
        if (a.mask(v)(i, j) == 0) EXPECT_EQ(a.view(v)(i, j), 0.0);
      }
    }
  }
}

TEST(MeanImpute, HandMean) {
  Matrix x(2, 3);
  x << 1, 0, 3, 0.5, 0, 0;
  Mask m(2, 3);
  m << 1, 0, 1, 1, 0, 0;
  Mask full = Mask::Ones(1, 3);
  const MultiViewDataset d = mean_impute(MultiViewDataset({x, Matrix::Ones(1, 3)}, {m, full}));
  EXPECT_EQ(d.view(0).row(0), (Matrix(1, 3) << 1, 2, 3).finished());
  EXPECT_EQ(d.view(0).row(1), Matrix::Constant(1, 3, 0.5));
  EXPECT_EQ(d.view(1), Matrix::Ones(1, 3));
}

TEST(Synth, NoiselessPrototypesTakeKValues) {
  const SyntheticData s = synth_generate(SyntheticSpec{{4, 4}, 30, 2, 1, 0.0, 5});
  for (const FeatureId& f : s.informative) {
    std::set<double> values;
    for (Eigen::Index j = 0; j < 30; ++j) values.insert(s.dataset.view(f.view)(f.feature, j));
    EXPECT_EQ(values.size(), 2u);
  }
  EXPECT_EQ(s.informative.size(), 2u);
}

TEST(Synth, Deterministic) {
  const SyntheticSpec spec{{5, 6}, 20, 3, 2, 0.05, 9};
  const SyntheticData a = synth_generate(spec), b = synth_generate(spec);
  for (std::size_t v = 0; v < 2; ++v) EXPECT_EQ(a.dataset.view(v), b.dataset.view(v));
  EXPECT_EQ(*a.dataset.labels(), *b.dataset.labels());
  EXPECT_EQ(a.informative, b.informative);
}

TEST(Synth, InformativeRowsClusterPerfectly) {
  const SyntheticData s = synth_generate(SyntheticSpec{{10, 10, 10}, 60, 3, 5, 0.01, 2});
  std::vector<Matrix> rows;
  Matrix x(static_cast<Eigen::Index>(s.informative.size()), 60);
  for (std::size_t i = 0; i < s.informative.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = s.dataset.view(s.informative[i].view).row(s.informative[i].feature);
  }
  const KMeansResult km = kmeans(x, 3, 0);
  EXPECT_DOUBLE_EQ(acc(*s.dataset.labels(), km.labels), 1.0);
}

TEST(Csv, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -0.0}) {
    EXPECT_EQ(csv::parse_double(csv::format_double(v)), v);
  }
  EXPECT_THROW(csv::parse_double("abc"), Error);
}
