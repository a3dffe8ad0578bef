#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trustfs/dataset.hpp"
#include "trustfs/selection.hpp"
#include "trustfs/solver.hpp"

namespace trustfs {

enum class RunVariant {
  kFull,
  kVariantI,    // no adaptive imputation
  kVariantII,   // standard CP instead of the view-weighted one
  kVariantIII,  // fixed kNN graphs
  kBaselineTwoStep,
  kAllFeatures,
};

std::string_view to_string(RunVariant variant);
RunVariant parse_variant(std::string_view text);

struct ExperimentConfig {
  // Dataset directory; when empty, `synthetic` is generated instead.
  std::optional<std::filesystem::path> data_dir;
  SyntheticSpec synthetic{{20, 20, 20}, 60, 3, 5, 0.05, 0};

  std::vector<double> missing_ratios{0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<double> feature_ratios{0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> gammas{2, 3, 4, 5, 6, 7};
  std::vector<double> lambdas{1e-3, 1e-2, 1e-1, 1, 1e1, 1e2, 1e3};
  std::vector<double> taus{1e-3, 1e-2, 1e-1, 1, 1e1, 1e2, 1e3};
  std::vector<std::uint64_t> seeds{0};

  RunVariant variant = RunVariant::kFull;
  Hyperparams base;  // gamma, lambda, tau and seed are overridden per cell
  EvalOptions eval;  // ratios are overridden by feature_ratios
  bool symmetric_graph_terms = true;
  bool evaluate_on_mean_imputed = false;
  bool per_view_missing = false;
  bool global_grid = false;  // pick one grid point for all missing ratios
  double plot_missing_ratio = 0.5;
  double plot_feature_ratio = 0.3;

  std::filesystem::path output_dir = "trustfs_out";
  int threads = 1;

  void validate() const;
};

// Flat "key = value" text, one entry per line, '#' starts a comment. List
// values are comma separated and may be wrapped in brackets.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct GridPoint {
  double gamma = 0.0;
  double lambda = 0.0;
  double tau = 0.0;
};

// One (missing ratio, grid point, seed) run of the pipeline.
struct CellResult {
  std::size_t missing_index = 0;
  std::size_t grid_index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::optional<SelectionResult> selection;
  std::optional<FitReport> report;
};

struct SweepRow {
  double missing_ratio = 0.0;
  GridPoint grid;
  RatioMetrics metrics;  // pooled over seeds
};

struct ExperimentSummary {
  std::vector<GridPoint> grid;
  std::vector<CellResult> cells;
  // Best grid point per missing ratio, with metrics averaged over feature ratios.
  std::vector<SweepRow> best;
  std::vector<SweepRow> feature_sweep;  // at plot_missing_ratio
  std::vector<SweepRow> missing_sweep;  // at plot_feature_ratio
};

// Runs every cell, writes per-run CSV/JSON plus summary.csv,
// sweep_feature_ratio.csv and sweep_missing_ratio.csv into output_dir.
ExperimentSummary run_experiment(const ExperimentConfig& config);

struct AblationRow {
  RunVariant variant = RunVariant::kFull;
  RatioMetrics metrics;
  ObjectiveValue final_objective;  // averaged over successful runs
  bool has_consensus = true;
  bool full_at_least_as_good = true;  // full model ACC >= this variant's ACC
};

struct AblationReport {
  std::vector<AblationRow> rows;
};

// Full model plus variants I-III under identical seeds and grid; writes
// ablation.csv next to one sub-directory per variant.
AblationReport run_ablation(const ExperimentConfig& config);

// Writes S_<v>.csv per view (1-based), belief.csv and uncertainty.csv.
std::vector<std::filesystem::path> dump_graphs(const ModelState& state,
                                               const std::filesystem::path& outdir);

std::string fit_report_csv(const FitReport& report);
std::string selection_json(const SelectionResult& result);
std::string ranking_json(const Ranking& ranking);
Ranking parse_ranking_json(std::string_view text);

// Pools k-means repeats of several runs that used the same repeat count.
RatioMetrics pool_metrics(std::span<const RatioMetrics> runs);

}  // namespace trustfs
