#include "trustfs/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "trustfs/error.hpp"

namespace trustfs {

namespace {

Ranking sorted_ranking(Ranking ranking) {
  std::sort(ranking.begin(), ranking.end(), [](const RankedFeature& a, const RankedFeature& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.view != b.view) return a.view < b.view;
    return a.feature < b.feature;
  });
  return ranking;
}

}  // namespace

Ranking rank_features(std::span<const Matrix> ws) {
  Ranking ranking;
  for (std::size_t v = 0; v < ws.size(); ++v) {
    const Vector norms = ws[v].rowwise().norm();
    for (Eigen::Index i = 0; i < norms.size(); ++i) ranking.push_back({v, i, norms(i)});
  }
  return sorted_ranking(std::move(ranking));
}

Ranking rank_by_variance(std::span<const Matrix> views) {
  Ranking ranking;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const Matrix& x = views[v];
    const Vector mean = x.rowwise().mean();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double var = (x.row(i).array() - mean(i)).square().mean();
      ranking.push_back({v, i, var});
    }
  }
  return sorted_ranking(std::move(ranking));
}

Matrix select_features(std::span<const Matrix> views, const Ranking& ranking, std::size_t count) {
  if (views.empty()) throw Error(ErrorKind::kInvalidArgument, "select_features: no views");
  count = std::min(count, ranking.size());
  Matrix out(static_cast<Eigen::Index>(count), views.front().cols());
  for (std::size_t i = 0; i < count; ++i) {
    const RankedFeature& f = ranking[i];
    if (f.view >= views.size() || f.feature >= views[f.view].rows()) {
      throw Error(ErrorKind::kInvalidArgument, "ranking refers to a feature outside the dataset");
    }
    out.row(static_cast<Eigen::Index>(i)) = views[f.view].row(f.feature);
  }
  return out;
}

namespace {

struct LloydState {
  Matrix centers;
  std::vector<int> labels;
  double wcss = 0.0;
};

Matrix seed_plus_plus(const Matrix& x, int k, std::mt19937_64& rng) {
  const Eigen::Index n = x.cols();
  Matrix centers(x.rows(), k);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.col(0) = x.col(first(rng));
  Vector nearest = (x.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double cumulative = 0.0;
      chosen = -1;
      for (Eigen::Index j = 0; j < n; ++j) {
        cumulative += nearest(j);
        if (target < cumulative) {
          chosen = j;
          break;
        }
      }
      if (chosen < 0) nearest.maxCoeff(&chosen);  // rounding at the upper end
    } else {
      std::uniform_int_distribution<Eigen::Index> any(0, n - 1);
      chosen = any(rng);
    }
    centers.col(c) = x.col(chosen);
    nearest = nearest.cwiseMin((x.colwise() - centers.col(c)).colwise().squaredNorm().transpose());
  }
  return centers;
}

LloydState lloyd(const Matrix& x, Matrix centers, int max_iter) {
  const Eigen::Index n = x.cols();
  const auto k = static_cast<int>(centers.cols());
  LloydState state;
  state.labels.assign(static_cast<std::size_t>(n), -1);
  Vector dist(n);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index j = 0; j < n; ++j) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (x.col(j) - centers.col(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      dist(j) = best_d;
      if (state.labels[static_cast<std::size_t>(j)] != best) {
        state.labels[static_cast<std::size_t>(j)] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(x.rows(), k);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index j = 0; j < n; ++j) {
      const int c = state.labels[static_cast<std::size_t>(j)];
      sums.col(c) += x.col(j);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.col(c) = sums.col(c) / counts[static_cast<std::size_t>(c)];
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      Eigen::Index far = 0;
      dist.maxCoeff(&far);
      centers.col(c) = x.col(far);
      dist(far) = 0.0;
    }
  }
  state.wcss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    state.wcss += (x.col(j) - centers.col(state.labels[static_cast<std::size_t>(j)])).squaredNorm();
  }
  state.centers = std::move(centers);
  return state;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, int k, std::uint64_t seed, int restarts, int max_iter) {
  if (k < 1 || k > x.cols()) throw Error(ErrorKind::kInvalidArgument, "kmeans: need 1 <= k <= n");
  if (restarts < 1) throw Error(ErrorKind::kInvalidArgument, "kmeans: restarts must be >= 1");
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < restarts; ++restart) {
    LloydState run = lloyd(x, seed_plus_plus(x, k, rng), max_iter);
    if (run.wcss < best.wcss) {
      best.wcss = run.wcss;
      best.labels = std::move(run.labels);
    }
  }
  return best;
}

std::vector<int> hungarian(const Matrix& cost) {
  const auto rows = static_cast<std::size_t>(cost.rows());
  const auto cols = static_cast<std::size_t>(cost.cols());
  if (rows > cols) throw Error(ErrorKind::kInvalidArgument, "hungarian: need rows <= cols");
  // Shortest augmenting paths with row/column potentials, 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<std::size_t> match(cols + 1, 0), way(cols + 1, 0);
  for (std::size_t i = 1; i <= rows; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<bool> used(cols + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(rows, -1);
  for (std::size_t j = 1; j <= cols; ++j) {
    if (match[j] != 0) assignment[match[j] - 1] = static_cast<int>(j - 1);
  }
  return assignment;
}

namespace {

// Contingency table with rows indexed by truth classes, columns by predicted clusters.
Matrix contingency(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorKind::kShapeMismatch, "label vectors differ in length");
  }
  std::map<int, Eigen::Index> rows, cols;
  for (int t : truth) rows.emplace(t, 0);
  for (int p : predicted) cols.emplace(p, 0);
  Eigen::Index next = 0;
  for (auto& [label, index] : rows) index = next++;
  next = 0;
  for (auto& [label, index] : cols) index = next++;
  Matrix table = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < truth.size(); ++i) table(rows[truth[i]], cols[predicted[i]]) += 1.0;
  return table;
}

double entropy(const Vector& counts, double n) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    if (counts(i) > 0.0) h -= counts(i) / n * std::log(counts(i) / n);
  }
  return h;
}

}  // namespace

double acc(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.empty()) {
    if (predicted.empty()) return 1.0;
    throw Error(ErrorKind::kShapeMismatch, "label vectors differ in length");
  }
  Matrix table = contingency(truth, predicted);
  if (table.rows() > table.cols()) table.transposeInPlace();
  const std::vector<int> assignment = hungarian(-table);
  double matched = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    matched += table(static_cast<Eigen::Index>(i), assignment[i]);
  }
  return matched / static_cast<double>(truth.size());
}

double nmi(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.empty()) {
    if (predicted.empty()) return 1.0;
    throw Error(ErrorKind::kShapeMismatch, "label vectors differ in length");
  }
  const Matrix table = contingency(truth, predicted);
  const double n = static_cast<double>(truth.size());
  const Vector row_counts = table.rowwise().sum();
  const Vector col_counts = table.colwise().sum().transpose();
  const double hu = entropy(row_counts, n);
  const double hv = entropy(col_counts, n);
  if (hu == 0.0 && hv == 0.0) return 1.0;  // both single-cluster partitions
  if (hu == 0.0 || hv == 0.0) return 0.0;
  double mi = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      const double nij = table(i, j);
      if (nij > 0.0) mi += nij / n * std::log(n * nij / (row_counts(i) * col_counts(j)));
    }
  }
  return std::clamp(mi / std::sqrt(hu * hv), 0.0, 1.0);
}

SelectionResult evaluate_selection(const MultiViewDataset& data, std::span<const Matrix> views,
                                   const Ranking& ranking, const EvalOptions& options) {
  if (!data.labels()) throw Error(ErrorKind::kInvalidArgument, "evaluation requires labels");
  if (options.repeats < 1) throw Error(ErrorKind::kInvalidArgument, "repeats must be >= 1");
  const std::vector<int>& labels = *data.labels();
  int k = options.clusters;
  if (k == 0) k = static_cast<int>(std::set<int>(labels.begin(), labels.end()).size());

  const auto total = static_cast<double>(ranking.size());
  SelectionResult result;
  result.ranking = ranking;
  for (double ratio : options.ratios) {
    if (!(ratio > 0.0 && ratio <= 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "feature ratios must lie in (0, 1]");
    }
    const auto count = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(ratio * total - 1e-9)), 1, ranking.size());
    const Matrix features = select_features(views, ranking, count);
    std::vector<double> accs, nmis;
    for (int rep = 0; rep < options.repeats; ++rep) {
      const std::uint64_t seed = options.seed * 1000003ULL + static_cast<std::uint64_t>(rep);
      const KMeansResult km = kmeans(features, k, seed, options.restarts);
      accs.push_back(acc(labels, km.labels));
      nmis.push_back(nmi(labels, km.labels));
    }
    auto mean_std = [](const std::vector<double>& xs) {
      const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      return std::pair{mean, std::sqrt(var / static_cast<double>(xs.size()))};
    };
    RatioMetrics m;
    m.ratio = ratio;
    m.selected = count;
    std::tie(m.acc_mean, m.acc_std) = mean_std(accs);
    std::tie(m.nmi_mean, m.nmi_std) = mean_std(nmis);
    result.metrics.push_back(m);
  }
  return result;
}

}  // namespace trustfs
