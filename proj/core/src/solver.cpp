#include "trustfs/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>

#include "trustfs/error.hpp"
#include "trustfs/tensor.hpp"

namespace trustfs {

void Hyperparams::validate() const {
  if (!(gamma > 1.0)) throw Error(ErrorKind::kInvalidArgument, "gamma must be > 1");
  if (!(lambda >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "lambda must be >= 0");
  if (!(tau >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "tau must be >= 0");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::kInvalidArgument, "epsilon must be > 0");
  if (c < 0 || r < 0) throw Error(ErrorKind::kInvalidArgument, "c and r must be >= 0");
  if (knn_k < 1) throw Error(ErrorKind::kInvalidArgument, "knn_k must be >= 1");
  if (max_iter < 0) throw Error(ErrorKind::kInvalidArgument, "max_iter must be >= 0");
  if (!(tol >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "tol must be >= 0");
}

SolverOptions options_for(Variant variant) {
  SolverOptions options;
  switch (variant) {
    case Variant::kFull: break;
    case Variant::kNoImputation: options.adaptive_imputation = false; break;
    case Variant::kStandardCp: options.weighted_cp = false; break;
    case Variant::kFixedGraph: options.graph_learning = false; break;
  }
  return options;
}

std::pair<int, int> resolve_dimensions(const MultiViewDataset& data, const Hyperparams& hp) {
  int c = hp.c;
  if (c == 0) {
    if (!data.labels()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "embedding dimension c must be set when the dataset has no labels");
    }
    c = static_cast<int>(std::set<int>(data.labels()->begin(), data.labels()->end()).size());
  }
  const int r = hp.r > 0 ? hp.r : c;
  return {c, r};
}

namespace {

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.1, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

// x .* numerator ./ max(denominator, floor)
Matrix multiplicative_step(const Matrix& x, const Matrix& numerator, const Matrix& denominator) {
  return x.cwiseProduct(numerator).cwiseQuotient(denominator.cwiseMax(kDenominatorFloor));
}

const Matrix& graph_numerator(const SimilarityGraph& graph, const SolverOptions& options,
                              Matrix& scratch) {
  if (!options.symmetric_graph_terms) return graph.weights;
  scratch = 0.5 * (graph.weights + graph.weights.transpose());
  return scratch;
}

std::vector<SimilarityGraph> graphs_of(const ModelState& state) {
  std::vector<SimilarityGraph> graphs;
  graphs.reserve(state.views.size());
  for (const auto& view : state.views) graphs.push_back(view.graph);
  return graphs;
}

std::vector<Matrix> xhats_of(const ModelState& state) {
  std::vector<Matrix> xhats;
  xhats.reserve(state.views.size());
  for (const auto& view : state.views) xhats.push_back(view.xhat);
  return xhats;
}

Tensor3 weighted_tensor(const ModelState& state, const Hyperparams& hp, const SolverOptions& options) {
  const auto slices = projected_views(state, hp, options, false);
  if (!options.weighted_cp) return stack(slices);
  return stack_weighted(slices, state.omega, hp.gamma);
}

double view_power(const ModelState& state, const Hyperparams& hp, const SolverOptions& options,
                  std::size_t v) {
  const double s = view_scale(state, hp, options, v);
  return s * s;
}

}  // namespace

ModelState initialize(const MultiViewDataset& data, const Hyperparams& hp,
                      const SolverOptions& options) {
  (void)options;
  hp.validate();
  const auto [c, r] = resolve_dimensions(data, hp);
  const Eigen::Index n = data.num_samples();
  if (hp.knn_k > n - 1) throw Error(ErrorKind::kInvalidArgument, "knn_k must be <= n - 1");

  const MultiViewDataset imputed = mean_impute(data);
  std::mt19937_64 rng(hp.seed);

  ModelState state;
  const std::size_t num_views = data.num_views();
  state.views.resize(num_views);
  for (std::size_t v = 0; v < num_views; ++v) {
    state.views[v].xhat = imputed.view(v);
    state.views[v].w = uniform_matrix(data.num_features(v), c, rng);
  }
  state.a = uniform_matrix(c, r, rng);
  state.h = uniform_matrix(n, r, rng);
  state.p = uniform_matrix(static_cast<Eigen::Index>(num_views), r, rng);
  state.omega = Vector::Constant(static_cast<Eigen::Index>(num_views), 1.0 / static_cast<double>(num_views));
  for (auto& view : state.views) view.graph = knn_graph(view.xhat, hp.knn_k);
  state.belief = belief_update(view_similarity(state.p));
  return state;
}

double view_scale(const ModelState& state, const Hyperparams& hp, const SolverOptions& options,
                  std::size_t v) {
  if (!options.weighted_cp) return 1.0;
  return std::pow(state.omega(static_cast<Eigen::Index>(v)), hp.gamma / 2.0);
}

Matrix cp_slice(const ModelState& state, std::size_t v) {
  return state.a * state.p.row(static_cast<Eigen::Index>(v)).asDiagonal() * state.h.transpose();
}

Matrix weighted_view_factor(const ModelState& state, const Hyperparams& hp,
                            const SolverOptions& options) {
  Matrix p = state.p;
  for (std::size_t v = 0; v < state.num_views(); ++v) {
    p.row(static_cast<Eigen::Index>(v)) *= view_scale(state, hp, options, v);
  }
  return p;
}

std::vector<Matrix> projected_views(const ModelState& state, const Hyperparams& hp,
                                    const SolverOptions& options, bool weighted) {
  std::vector<Matrix> slices;
  slices.reserve(state.num_views());
  for (std::size_t v = 0; v < state.num_views(); ++v) {
    Matrix z = state.views[v].w.transpose() * state.views[v].xhat;
    if (weighted) z *= view_scale(state, hp, options, v);
    slices.push_back(std::move(z));
  }
  return slices;
}

Matrix update_xhat(std::size_t v, const ModelState& state, const MultiViewDataset& data,
                   const Hyperparams& hp, const SolverOptions& options) {
  const ViewFactors& view = state.views[v];
  const Matrix& x = data.view(v);
  const Mask& mask = data.mask(v);
  const double power = view_power(state, hp, options, v);

  Matrix scratch;
  const Matrix& s = graph_numerator(view.graph, options, scratch);
  const Vector degree = laplacian(view.graph).degree;

  const Matrix numerator = power * (view.w * cp_slice(state, v)) + hp.tau * (view.xhat * s);
  const Matrix denominator = power * (view.w * (view.w.transpose() * view.xhat)) +
                             hp.tau * (view.xhat * degree.asDiagonal());
  Matrix out = multiplicative_step(view.xhat, numerator, denominator);
  out = (mask.array() != 0).select(x, out);
  return out;
}

Matrix update_w(std::size_t v, const ModelState& state, const Hyperparams& hp) {
  const ViewFactors& view = state.views[v];
  const Vector reweight =
      (2.0 * view.w.rowwise().norm().array() + hp.epsilon).inverse().matrix();  // diag of Lambda
  const Matrix numerator = view.xhat * cp_slice(state, v).transpose();
  const Matrix denominator = view.xhat * (view.xhat.transpose() * view.w) +
                             hp.lambda * (reweight.asDiagonal() * view.w);
  return multiplicative_step(view.w, numerator, denominator);
}

Matrix update_a(const ModelState& state, const Hyperparams& hp, const SolverOptions& options) {
  const Tensor3 z = weighted_tensor(state, hp, options);
  const Matrix kr = khatri_rao(weighted_view_factor(state, hp, options), state.h);
  const Matrix numerator = unfold(z, 1) * kr;
  const Matrix denominator = state.a * (kr.transpose() * kr);
  return multiplicative_step(state.a, numerator, denominator);
}

ViewFactorUpdate update_p(const ModelState& state, const Hyperparams& hp,
                          const SolverOptions& options) {
  // The view factor is fitted to the unweighted tensor.
  const Tensor3 z = stack(projected_views(state, hp, options, false));
  const Matrix kr = khatri_rao(state.h, state.a);
  const Matrix numerator = unfold(z, 3) * kr;
  const Matrix denominator = state.p * (kr.transpose() * kr);
  ViewFactorUpdate out;
  out.p = multiplicative_step(state.p, numerator, denominator);
  out.belief = belief_update(view_similarity(out.p));
  return out;
}

MultiplicativeTerms h_update_terms(const ModelState& state, const Hyperparams& hp,
                                   const SolverOptions& options) {
  const Tensor3 z = weighted_tensor(state, hp, options);
  const Matrix kr = khatri_rao(weighted_view_factor(state, hp, options), state.a);
  MultiplicativeTerms terms{unfold(z, 2) * kr, state.h * (kr.transpose() * kr)};
  Matrix scratch;
  for (const auto& view : state.views) {
    const Vector degree = laplacian(view.graph).degree;
    terms.numerator += hp.tau * (graph_numerator(view.graph, options, scratch) * state.h);
    terms.denominator += hp.tau * (degree.asDiagonal() * state.h);
  }
  return terms;
}

Matrix h_gradient(const ModelState& state, const Hyperparams& hp, const SolverOptions& options) {
  SolverOptions exact = options;
  exact.symmetric_graph_terms = true;
  const MultiplicativeTerms terms = h_update_terms(state, hp, exact);
  return 2.0 * (terms.denominator - terms.numerator);
}

Matrix update_h(const ModelState& state, const Hyperparams& hp, const SolverOptions& options) {
  const MultiplicativeTerms terms = h_update_terms(state, hp, options);
  return multiplicative_step(state.h, terms.numerator, terms.denominator);
}

double l21_norm(const Matrix& m) { return m.rowwise().norm().sum(); }

Vector view_losses(const ModelState& state, const Hyperparams& hp) {
  Vector losses(static_cast<Eigen::Index>(state.num_views()));
  for (std::size_t v = 0; v < state.num_views(); ++v) {
    const ViewFactors& view = state.views[v];
    losses(static_cast<Eigen::Index>(v)) =
        (view.w.transpose() * view.xhat - cp_slice(state, v)).squaredNorm() + hp.lambda * l21_norm(view.w);
  }
  return losses;
}

Vector omega_from_losses(const Vector& losses, double gamma) {
  if (!(gamma > 1.0)) throw Error(ErrorKind::kInvalidArgument, "gamma must be > 1");
  // Work in logs: b^(1/(1-gamma)) overflows for tiny b.
  const Vector logs = losses.cwiseMax(1e-12).array().log() / (1.0 - gamma);
  Vector w = (logs.array() - logs.maxCoeff()).exp();
  return w / w.sum();
}

Vector update_omega(const ModelState& state, const Hyperparams& hp) {
  return omega_from_losses(view_losses(state, hp), hp.gamma);
}

ObjectiveValue objective(const ModelState& state, const Hyperparams& hp, const SolverOptions& options) {
  ObjectiveValue out;
  for (std::size_t v = 0; v < state.num_views(); ++v) {
    const ViewFactors& view = state.views[v];
    const double power = view_power(state, hp, options, v);
    out.fit += power * (view.w.transpose() * view.xhat - cp_slice(state, v)).squaredNorm();
    out.sparsity += hp.lambda * power * l21_norm(view.w);
  }
  const auto graphs = graphs_of(state);
  const auto xhats = xhats_of(state);
  const GraphTerms terms = graph_objective_terms(graphs, xhats, state.h, state.belief.belief);
  out.smoothness = hp.tau * terms.smoothness;
  out.consensus = options.graph_learning ? hp.tau * terms.consensus : 0.0;
  out.total = out.fit + out.sparsity + out.smoothness + out.consensus;
  return out;
}

double xhat_subproblem(std::size_t v, const ModelState& state, const Hyperparams& hp,
                       const SolverOptions& options, const Matrix& xhat) {
  const ViewFactors& view = state.views[v];
  const Matrix lap = laplacian(view.graph).laplacian;
  return view_power(state, hp, options, v) *
             (view.w.transpose() * xhat - cp_slice(state, v)).squaredNorm() +
         hp.tau * (xhat * lap * xhat.transpose()).trace();
}

double w_subproblem(std::size_t v, const ModelState& state, const Hyperparams& hp, const Matrix& w) {
  const ViewFactors& view = state.views[v];
  return (w.transpose() * view.xhat - cp_slice(state, v)).squaredNorm() + hp.lambda * l21_norm(w);
}

double a_subproblem(const ModelState& state, const Hyperparams& hp, const SolverOptions& options,
                    const Matrix& a) {
  const Tensor3 z = weighted_tensor(state, hp, options);
  const Matrix kr = khatri_rao(weighted_view_factor(state, hp, options), state.h);
  return (unfold(z, 1) - a * kr.transpose()).squaredNorm();
}

double p_subproblem(const ModelState& state, const Matrix& p) {
  const Tensor3 z = stack(projected_views(state, Hyperparams{}, SolverOptions{}, false));
  const Matrix kr = khatri_rao(state.h, state.a);
  return (unfold(z, 3) - p * kr.transpose()).squaredNorm();
}

double h_subproblem(const ModelState& state, const Hyperparams& hp, const SolverOptions& options,
                    const Matrix& h) {
  const Tensor3 z = weighted_tensor(state, hp, options);
  const Matrix kr = khatri_rao(weighted_view_factor(state, hp, options), state.a);
  double value = (unfold(z, 2) - h * kr.transpose()).squaredNorm();
  for (const auto& view : state.views) {
    value += hp.tau * (h.transpose() * (laplacian(view.graph).laplacian * h)).trace();
  }
  return value;
}

ConstraintReport check_constraints(const ModelState& state, const MultiViewDataset& data) {
  ConstraintReport out;
  double min_factor = std::min({state.a.minCoeff(), state.h.minCoeff(), state.p.minCoeff(),
                                state.omega.minCoeff()});
  out.omega_simplex = std::abs(state.omega.sum() - 1.0);
  out.graph_min = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < state.num_views(); ++v) {
    const ViewFactors& view = state.views[v];
    const Mask& mask = data.mask(v);
    const Matrix diff = (view.xhat - data.view(v)).cwiseAbs();
    out.pinning = std::max(out.pinning, (mask.array() != 0).select(diff, 0.0).maxCoeff());
    min_factor = std::min({min_factor, view.w.minCoeff(), view.xhat.minCoeff()});
    const Matrix& s = view.graph.weights;
    out.graph_simplex = std::max(out.graph_simplex, (s.colwise().sum().array() - 1.0).abs().maxCoeff());
    out.graph_diagonal = std::max(out.graph_diagonal, s.diagonal().cwiseAbs().maxCoeff());
    out.graph_min = std::min(out.graph_min, s.minCoeff());
  }
  out.min_factor = min_factor;
  return out;
}

namespace {

void require_finite(const ObjectiveValue& value, int iteration) {
  const std::pair<const char*, double> terms[] = {{"fit", value.fit},
                                                  {"sparsity", value.sparsity},
                                                  {"smoothness", value.smoothness},
                                                  {"consensus", value.consensus}};
  for (const auto& [name, term] : terms) {
    if (!std::isfinite(term)) {
      throw Error(ErrorKind::kNonFinite, "objective term '" + std::string(name) +
                                             "' is not finite at iteration " + std::to_string(iteration));
    }
  }
}

}  // namespace

FitResult fit(const MultiViewDataset& data, const Hyperparams& hp, const SolverOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  FitResult result;
  ModelState& state = result.state;
  FitReport& report = result.report;
  state = initialize(data, hp, options);
  report.initial = objective(state, hp, options);
  require_finite(report.initial, 0);
  report.notes = {"normalization: per-feature min-max over observed entries",
                  "tau scales every graph block, so it cancels inside the similarity update",
                  "uncertainty masses are diagnostic only"};

  double previous = report.initial.total;
  int streak = 0;
  for (int iteration = 1; iteration <= hp.max_iter; ++iteration) {
    const std::size_t num_views = state.num_views();
    if (options.adaptive_imputation) {
      for (std::size_t v = 0; v < num_views; ++v) state.views[v].xhat = update_xhat(v, state, data, hp, options);
    }
    for (std::size_t v = 0; v < num_views; ++v) state.views[v].w = update_w(v, state, hp);
    state.a = update_a(state, hp, options);
    ViewFactorUpdate pu = update_p(state, hp, options);
    state.p = std::move(pu.p);
    if (options.graph_learning) {
      state.belief = std::move(pu.belief);
      auto graphs = graphs_of(state);
      for (std::size_t v = 0; v < num_views; ++v) {
        const Matrix penalty = pairwise_penalty(state.views[v].xhat, state.h);
        graphs[v] = update_similarity(v, graphs, state.belief.belief, penalty);
        state.views[v].graph = graphs[v];
      }
    }
    state.h = update_h(state, hp, options);
    if (options.weighted_cp) state.omega = update_omega(state, hp);

    const ObjectiveValue value = objective(state, hp, options);
    require_finite(value, iteration);
    report.history.push_back({iteration, value});
    report.iterations = iteration;

    const double change = std::abs(previous - value.total) / std::max(std::abs(previous), 1e-300);
    if (value.total > previous * (1.0 + 1e-6)) {
      report.warnings.push_back("objective increased at iteration " + std::to_string(iteration));
    }
    previous = value.total;
    streak = change < hp.tol ? streak + 1 : 0;
    if (streak >= options.convergence_window) {
      report.converged = true;
      break;
    }
  }
  report.constraints = check_constraints(state, data);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace trustfs
