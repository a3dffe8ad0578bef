#pragma once

#include <span>
#include <utility>
#include <vector>

#include "trustfs/types.hpp"

namespace trustfs {

// n x n sample-affinity matrix whose columns lie on the probability simplex
// with a zero diagonal.
struct SimilarityGraph {
  Matrix weights;

  Eigen::Index size() const { return weights.rows(); }

  // Largest deviation from the column-simplex constraints: |column sum - 1|,
  // negative entries and nonzero diagonal entries.
  double constraint_violation() const;
};

// L = D - (S + S^T)/2 where D is the degree matrix of the symmetrized graph,
// so L is a proper graph Laplacian (PSD, L * 1 = 0) for every input.
struct LaplacianPair {
  Matrix laplacian;
  Vector degree;  // diagonal of D
};

SimilarityGraph knn_graph(const Matrix& x, int k);

LaplacianPair laplacian(const SimilarityGraph& s);

// F_ij = ||xhat_.i - xhat_.j||^2 + ||h_i. - h_j.||^2.
Matrix pairwise_penalty(const Matrix& xhat, const Matrix& h);

// Squared Euclidean distances between the columns of x.
Matrix column_sq_distances(const Matrix& x);

// Euclidean projection of q onto {s >= 0, sum s = 1, s[zero_idx] = 0}.
Vector project_simplex_zero(const Vector& q, Eigen::Index zero_idx);

// Target matrix of the column-wise similarity subproblem for view v.
// belief(v, k) is the belief mass of view v in view k (zero diagonal).
Matrix similarity_target(std::size_t v, std::span<const SimilarityGraph> graphs,
                         const Matrix& belief, const Matrix& penalty);

// Projects every column of similarity_target(...) onto the constraint set.
SimilarityGraph update_similarity(std::size_t v, std::span<const SimilarityGraph> graphs,
                                  const Matrix& belief, const Matrix& penalty);

struct GraphTerms {
  double smoothness = 0.0;
  double consensus = 0.0;
};

// Unweighted graph blocks of the objective:
//   smoothness = sum_v 1/2 sum_ij ||xhat_.i - xhat_.j||^2 S_ij + Tr(H^T L H)
//   consensus  = sum_v ||S^(v) - sum_{k != v} belief(v,k) S^(k)||_F^2
GraphTerms graph_objective_terms(std::span<const SimilarityGraph> graphs,
                                 std::span<const Matrix> xhats, const Matrix& h,
                                 const Matrix& belief);

}  // namespace trustfs
