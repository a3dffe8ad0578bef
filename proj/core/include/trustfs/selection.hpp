#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trustfs/dataset.hpp"
#include "trustfs/types.hpp"

namespace trustfs {

struct RankedFeature {
  std::size_t view = 0;
  Eigen::Index feature = 0;
  double score = 0.0;
};

using Ranking = std::vector<RankedFeature>;

// Pools every row of every W^(v), sorted by row l2 norm descending; ties go to
// the lower (view, feature) pair.
Ranking rank_features(std::span<const Matrix> ws);

// Two-step baseline: rank rows by the variance of their (imputed) values.
Ranking rank_by_variance(std::span<const Matrix> views);

// Rows of the top `count` ranked features, in ranking order, as a count x n matrix.
Matrix select_features(std::span<const Matrix> views, const Ranking& ranking,
                       std::size_t count);

struct KMeansResult {
  std::vector<int> labels;
  double wcss = 0.0;
};

// Lloyd iterations from k-means++ seeds; the restart with the lowest
// within-cluster sum of squares wins. Columns of x are the points.
KMeansResult kmeans(const Matrix& x, int k, std::uint64_t seed, int restarts = 20,
                    int max_iter = 300);

// Clustering accuracy under the best one-to-one cluster-to-class mapping.
double acc(std::span<const int> truth, std::span<const int> predicted);

// Mutual information normalized by the geometric mean of the entropies.
double nmi(std::span<const int> truth, std::span<const int> predicted);

// Minimum-cost assignment of rows to columns for a rectangular cost matrix
// (rows <= cols). Returns the column chosen for each row.
std::vector<int> hungarian(const Matrix& cost);

struct RatioMetrics {
  double ratio = 0.0;
  std::size_t selected = 0;
  double acc_mean = 0.0;
  double acc_std = 0.0;
  double nmi_mean = 0.0;
  double nmi_std = 0.0;
};

struct SelectionResult {
  Ranking ranking;
  std::vector<RatioMetrics> metrics;
};

struct EvalOptions {
  std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5};
  int repeats = 20;   // independent k-means runs, each with its own seed
  int restarts = 20;  // k-means++ restarts inside one run
  int clusters = 0;   // 0 = number of label classes
  std::uint64_t seed = 0;
};

// Clusters the top ceil(ratio * sum d_v) features of `views` for every ratio.
// Throws Error if `data` carries no labels.
SelectionResult evaluate_selection(const MultiViewDataset& data, std::span<const Matrix> views,
                                   const Ranking& ranking, const EvalOptions& options);

}  // namespace trustfs
