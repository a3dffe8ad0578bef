#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trustfs/dataset.hpp"
#include "trustfs/evidence.hpp"
#include "trustfs/graph.hpp"
#include "trustfs/types.hpp"

namespace trustfs {

struct Hyperparams {
  double gamma = 4.0;   // view-weight exponent, must exceed 1
  double lambda = 1e-2;  // l2,1 weight
  double tau = 1.0;     // graph weight
  int c = 0;            // embedding dimension; 0 = number of label classes
  int r = 0;            // CP rank; 0 = c
  double epsilon = 1e-8;
  int knn_k = 5;
  int max_iter = 200;
  double tol = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

// Switches for the ablation variants. The defaults give the full model.
struct SolverOptions {
  bool adaptive_imputation = true;  // false: X-hat stays at mean imputation
  bool weighted_cp = true;          // false: plain CP, omega fixed uniform, no gamma powers
  bool graph_learning = true;       // false: graphs stay at the kNN init, no consensus term
  // Numerators of the X-hat and H updates use (S + S^T)/2, which matches the
  // Laplacian L = D - (S + S^T)/2. false: use S as printed in the update rules.
  bool symmetric_graph_terms = true;
  int convergence_window = 3;
};

enum class Variant { kFull, kNoImputation, kStandardCp, kFixedGraph };

SolverOptions options_for(Variant variant);

struct ViewFactors {
  Matrix w;     // d_v x c
  Matrix xhat;  // d_v x n
  SimilarityGraph graph;
};

struct ModelState {
  std::vector<ViewFactors> views;
  Matrix a;  // c x r
  Matrix h;  // n x r
  Matrix p;  // V x r
  Vector omega;
  BeliefState belief;

  std::size_t num_views() const { return views.size(); }
};

struct ObjectiveValue {
  double total = 0.0;
  // Weighted contributions; total is their sum.
  double fit = 0.0;
  double sparsity = 0.0;
  double smoothness = 0.0;
  double consensus = 0.0;
};

struct ConstraintReport {
  double pinning = 0.0;         // max |xhat - x| over observed cells
  double min_factor = 0.0;      // smallest entry over W, X-hat, A, H, P, omega
  double omega_simplex = 0.0;   // |sum omega - 1|
  double graph_simplex = 0.0;   // max column-sum deviation over all S
  double graph_diagonal = 0.0;  // max |S_ii|
  double graph_min = 0.0;       // smallest S entry
};

struct IterationRecord {
  int iteration = 0;
  ObjectiveValue objective;
};

struct FitReport {
  ObjectiveValue initial;
  std::vector<IterationRecord> history;
  int iterations = 0;
  bool converged = false;
  ConstraintReport constraints;
  double seconds = 0.0;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
};

struct FitResult {
  ModelState state;
  FitReport report;
};

// Embedding dimension and rank after applying the defaults.
std::pair<int, int> resolve_dimensions(const MultiViewDataset& data, const Hyperparams& hp);

// X-hat starts at mean imputation, S at the kNN graph, omega at 1/V and W, A, H,
// P at seeded i.i.d. Uniform(0.1, 1) draws.
ModelState initialize(const MultiViewDataset& data, const Hyperparams& hp,
                      const SolverOptions& options = {});

// omega_v^(gamma/2), or 1 when the CP is unweighted.
double view_scale(const ModelState& state, const Hyperparams& hp, const SolverOptions& options,
                  std::size_t v);

// Gamma^(v) = A diag(P_v.) H^T, the CP slice for view v.
Matrix cp_slice(const ModelState& state, std::size_t v);

// P with row v scaled by view_scale(v).
Matrix weighted_view_factor(const ModelState& state, const Hyperparams& hp,
                            const SolverOptions& options);

// Slices W^(v)^T X-hat^(v), optionally scaled by view_scale(v).
std::vector<Matrix> projected_views(const ModelState& state, const Hyperparams& hp,
                                    const SolverOptions& options, bool weighted);

Matrix update_xhat(std::size_t v, const ModelState& state, const MultiViewDataset& data,
                   const Hyperparams& hp, const SolverOptions& options = {});
Matrix update_w(std::size_t v, const ModelState& state, const Hyperparams& hp);
Matrix update_a(const ModelState& state, const Hyperparams& hp, const SolverOptions& options = {});

struct ViewFactorUpdate {
  Matrix p;
  BeliefState belief;
};
ViewFactorUpdate update_p(const ModelState& state, const Hyperparams& hp,
                          const SolverOptions& options = {});

// Split of the H gradient into the positive parts used by the multiplicative
// step: update = H * numerator / denominator.
struct MultiplicativeTerms {
  Matrix numerator;
  Matrix denominator;
};
MultiplicativeTerms h_update_terms(const ModelState& state, const Hyperparams& hp,
                                   const SolverOptions& options = {});
// Gradient of h_subproblem at state.h, 2 (denominator - numerator) of the
// symmetric split.
Matrix h_gradient(const ModelState& state, const Hyperparams& hp, const SolverOptions& options = {});
Matrix update_h(const ModelState& state, const Hyperparams& hp, const SolverOptions& options = {});

// b^(v) = ||W^T X-hat - Gamma^(v)||_F^2 + lambda ||W^(v)||_{2,1}.
Vector view_losses(const ModelState& state, const Hyperparams& hp);
// omega_v proportional to b_v^(1/(1-gamma)); b is floored at 1e-12.
Vector omega_from_losses(const Vector& losses, double gamma);
Vector update_omega(const ModelState& state, const Hyperparams& hp);

double l21_norm(const Matrix& m);

ObjectiveValue objective(const ModelState& state, const Hyperparams& hp,
                         const SolverOptions& options = {});

// Objectives of the individual subproblems, evaluated at a candidate value of
// the variable being updated with everything else taken from `state`.
double xhat_subproblem(std::size_t v, const ModelState& state, const Hyperparams& hp,
                       const SolverOptions& options, const Matrix& xhat);
double w_subproblem(std::size_t v, const ModelState& state, const Hyperparams& hp, const Matrix& w);
double a_subproblem(const ModelState& state, const Hyperparams& hp, const SolverOptions& options,
                    const Matrix& a);
double p_subproblem(const ModelState& state, const Matrix& p);
double h_subproblem(const ModelState& state, const Hyperparams& hp, const SolverOptions& options,
                    const Matrix& h);

ConstraintReport check_constraints(const ModelState& state, const MultiViewDataset& data);

// Alternating updates in the order X-hat, W, A, (P, beliefs), S, H, omega until
// the relative objective change stays below tol for convergence_window
// consecutive iterations, or max_iter is reached. Throws Error(kNonFinite)
// naming the first non-finite objective term.
FitResult fit(const MultiViewDataset& data, const Hyperparams& hp,
              const SolverOptions& options = {});

}  // namespace trustfs
