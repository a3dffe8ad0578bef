#include "trustfs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trustfs/error.hpp"

namespace trustfs {

double SimilarityGraph::constraint_violation() const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < weights.cols(); ++i) {
    worst = std::max(worst, std::abs(weights.col(i).sum() - 1.0));
    worst = std::max(worst, std::abs(weights(i, i)));
    worst = std::max(worst, -weights.col(i).minCoeff());
  }
  return worst;
}

Matrix column_sq_distances(const Matrix& x) {
  const Eigen::Index n = x.cols();
  const Vector norms = x.colwise().squaredNorm().transpose();
  const Matrix gram = x.transpose() * x;
  Matrix d(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    d(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) d(i, j) = std::max(0.0, norms(i) + norms(j) - 2.0 * gram(i, j));
  }
  d.triangularView<Eigen::StrictlyUpper>() = d.transpose();
  return d;
}

SimilarityGraph knn_graph(const Matrix& x, int k) {
  const Eigen::Index n = x.cols();
  if (k < 1 || k > n - 1) {
    throw Error(ErrorKind::kInvalidArgument, "knn_graph: k must lie in [1, n-1]");
  }
  const Matrix dist = column_sq_distances(x);
  SimilarityGraph graph{Matrix::Zero(n, n)};
  std::vector<Eigen::Index> order;
  order.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    order.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    // Lower index first among equal distances.
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return dist(a, i) < dist(b, i); });

    const auto kk = static_cast<std::size_t>(k);
    double denom = 0.0;
    double cutoff = 0.0;
    if (kk < order.size()) {
      cutoff = dist(order[kk], i);
      for (std::size_t h = 0; h < kk; ++h) denom += cutoff - dist(order[h], i);
    }
    for (std::size_t h = 0; h < kk; ++h) {
      graph.weights(order[h], i) =
          denom > 0.0 ? (cutoff - dist(order[h], i)) / denom : 1.0 / static_cast<double>(k);
    }
  }
  return graph;
}

LaplacianPair laplacian(const SimilarityGraph& s) {
  const Matrix sym = 0.5 * (s.weights + s.weights.transpose());
  LaplacianPair out;
  out.degree = sym.rowwise().sum();
  out.laplacian = -sym;
  out.laplacian.diagonal() += out.degree;
  return out;
}

Matrix pairwise_penalty(const Matrix& xhat, const Matrix& h) {
  if (xhat.cols() != h.rows()) {
    throw Error(ErrorKind::kShapeMismatch, "pairwise_penalty: sample counts differ");
  }
  Matrix stacked(xhat.rows() + h.cols(), xhat.cols());
  stacked << xhat, h.transpose();
  return column_sq_distances(stacked);
}

Vector project_simplex_zero(const Vector& q, Eigen::Index zero_idx) {
  const Eigen::Index n = q.size();
  if (n < 2 || zero_idx < 0 || zero_idx >= n) {
    throw Error(ErrorKind::kInvalidArgument, "project_simplex_zero: need n >= 2 and a valid index");
  }
  std::vector<double> sorted;
  sorted.reserve(static_cast<std::size_t>(n - 1));
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j != zero_idx) sorted.push_back(q(j));
  }
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }

  Vector s(n);
  for (Eigen::Index j = 0; j < n; ++j) s(j) = j == zero_idx ? 0.0 : std::max(q(j) - theta, 0.0);
  return s;
}

namespace {

void check_graphs(std::size_t v, std::span<const SimilarityGraph> graphs, const Matrix& belief) {
  if (v >= graphs.size()) throw Error(ErrorKind::kInvalidArgument, "view index out of range");
  const auto num_views = static_cast<Eigen::Index>(graphs.size());
  if (belief.rows() != num_views || belief.cols() != num_views) {
    throw Error(ErrorKind::kShapeMismatch, "belief matrix must be V x V");
  }
}

}  // namespace

Matrix similarity_target(std::size_t v, std::span<const SimilarityGraph> graphs,
                         const Matrix& belief, const Matrix& penalty) {
  check_graphs(v, graphs, belief);
  const std::size_t num_views = graphs.size();
  const auto vi = static_cast<Eigen::Index>(v);
  const Eigen::Index n = graphs[v].size();

  Matrix numerator = Matrix::Zero(n, n);
  double denominator = 1.0;
  for (std::size_t k = 0; k < num_views; ++k) {
    if (k == v) continue;
    const auto ki = static_cast<Eigen::Index>(k);
    numerator += belief(vi, ki) * graphs[k].weights;  // C^(v)

    // R^(k) = S^(k) - sum_{t != k, v} b_kt S^(t)
    Matrix residual = graphs[k].weights;
    for (std::size_t t = 0; t < num_views; ++t) {
      if (t == k || t == v) continue;
      residual -= belief(ki, static_cast<Eigen::Index>(t)) * graphs[t].weights;
    }
    numerator += belief(ki, vi) * residual;
    denominator += belief(ki, vi) * belief(ki, vi);
  }
  numerator -= 0.5 * penalty;
  return numerator / denominator;
}

SimilarityGraph update_similarity(std::size_t v, std::span<const SimilarityGraph> graphs,
                                  const Matrix& belief, const Matrix& penalty) {
  const Matrix target = similarity_target(v, graphs, belief, penalty);
  SimilarityGraph out{Matrix(target.rows(), target.cols())};
  for (Eigen::Index i = 0; i < target.cols(); ++i) {
    out.weights.col(i) = project_simplex_zero(target.col(i), i);
  }
  return out;
}

GraphTerms graph_objective_terms(std::span<const SimilarityGraph> graphs,
                                 std::span<const Matrix> xhats, const Matrix& h,
                                 const Matrix& belief) {
  if (graphs.size() != xhats.size()) {
    throw Error(ErrorKind::kShapeMismatch, "graph_objective_terms: one X-hat per graph required");
  }
  GraphTerms terms;
  for (std::size_t v = 0; v < graphs.size(); ++v) {
    const Matrix& s = graphs[v].weights;
    // 1/2 sum_ij S_ij ||z_i - z_j||^2 with z = [x-hat; H^T], which equals
    // Tr(X-hat L X-hat^T) + Tr(H^T L H), expanded through the row and column
    // sums of S.
    Matrix z(xhats[v].rows() + h.cols(), h.rows());
    z << xhats[v], h.transpose();
    const Eigen::RowVectorXd norms = z.colwise().squaredNorm();
    const double spread = 0.5 * (s.rowwise().sum().dot(norms.transpose()) + s.colwise().sum().dot(norms));
    terms.smoothness += spread - z.cwiseProduct(z * s.transpose()).sum();

    Matrix gap = s;
    for (std::size_t k = 0; k < graphs.size(); ++k) {
      if (k == v) continue;
      gap -= belief(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(k)) * graphs[k].weights;
    }
    terms.consensus += gap.squaredNorm();
  }
  return terms;
}

}  // namespace trustfs
