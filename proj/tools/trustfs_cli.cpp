#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trustfs/csv.hpp"
#include "trustfs/dataset.hpp"
#include "trustfs/error.hpp"
#include "trustfs/experiment.hpp"
#include "trustfs/selection.hpp"
#include "trustfs/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace trustfs;

namespace {

// Where the data for fit / dump-graphs / eval comes from.
struct DataArgs {
  std::string dir;
  std::vector<Eigen::Index> synth_features{20, 20, 20};
  Eigen::Index synth_samples = 60;
  int synth_classes = 3;
  Eigen::Index synth_informative = 5;
  double synth_noise = 0.05;
  std::uint64_t synth_seed = 0;
  double missing = 0.0;
  std::uint64_t missing_seed = 0;
  bool per_view_missing = false;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("--data", args.dir, "Dataset directory (meta.json + view_<i>.csv); synthetic data if omitted");
  cmd->add_option("--synth-features", args.synth_features, "Features per synthetic view")->delimiter(',');
  cmd->add_option("--synth-samples", args.synth_samples, "Synthetic sample count");
  cmd->add_option("--synth-classes", args.synth_classes, "Synthetic class count");
  cmd->add_option("--synth-informative", args.synth_informative, "Informative rows per synthetic view");
  cmd->add_option("--synth-noise", args.synth_noise, "Noise std of informative rows");
  cmd->add_option("--synth-seed", args.synth_seed, "Synthetic generator seed");
  cmd->add_option("--missing", args.missing, "Fraction of cells to remove before use");
  cmd->add_option("--missing-seed", args.missing_seed, "Seed of the missing-cell draw");
  cmd->add_flag("--per-view-missing", args.per_view_missing, "Remove cells within each view separately");
}

MultiViewDataset load_data(const DataArgs& args) {
  MultiViewDataset data;
  if (!args.dir.empty()) {
    data = load_dataset(args.dir);
  } else {
    SyntheticSpec spec{args.synth_features, args.synth_samples, args.synth_classes,
                       args.synth_informative, args.synth_noise, args.synth_seed};
    data = synth_generate(spec).dataset;
  }
  data = normalize_views(data);
  if (args.missing > 0.0) {
    data = inject_missing(data, args.missing, args.missing_seed, MissingOptions{args.per_view_missing, 100});
  }
  return data;
}

struct FitArgs {
  Hyperparams hp;
  std::string variant = "full";
  bool verbatim = false;
};

void add_fit_options(CLI::App* cmd, FitArgs& args) {
  cmd->add_option("--gamma", args.hp.gamma, "View-weight exponent (> 1)");
  cmd->add_option("--lambda", args.hp.lambda, "Row-sparsity weight");
  cmd->add_option("--tau", args.hp.tau, "Graph weight");
  cmd->add_option("--c", args.hp.c, "Embedding dimension (0 = label classes)");
  cmd->add_option("--r", args.hp.r, "CP rank (0 = c)");
  cmd->add_option("--knn-k", args.hp.knn_k, "Neighbours in the initial graphs");
  cmd->add_option("--max-iter", args.hp.max_iter, "Iteration cap");
  cmd->add_option("--tol", args.hp.tol, "Relative objective tolerance");
  cmd->add_option("--epsilon", args.hp.epsilon, "Row-norm guard of the l2,1 reweighting");
  cmd->add_option("--seed", args.hp.seed, "Initialization seed");
  cmd->add_option("--variant", args.variant, "full, variant-I, variant-II or variant-III");
  cmd->add_flag("--verbatim-graph-terms", args.verbatim, "Use S instead of (S + S^T)/2 in the X-hat and H numerators");
}

SolverOptions to_options(const FitArgs& args) {
  SolverOptions options;
  switch (parse_variant(args.variant)) {
    case RunVariant::kFull: break;
    case RunVariant::kVariantI: options = options_for(Variant::kNoImputation); break;
    case RunVariant::kVariantII: options = options_for(Variant::kStandardCp); break;
    case RunVariant::kVariantIII: options = options_for(Variant::kFixedGraph); break;
    default: throw Error(ErrorKind::kInvalidArgument, "fit accepts full and variant-I/II/III only");
  }
  options.symmetric_graph_terms = !args.verbatim;
  return options;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ordered_json objective_json(const ObjectiveValue& v) {
  return {{"total", v.total}, {"fit", v.fit}, {"sparsity", v.sparsity},
          {"smoothness", v.smoothness}, {"consensus", v.consensus}};
}

void write_fit_outputs(const FitResult& result, const fs::path& out) {
  ensure_dir(out);
  csv::write_text(out / "fit_report.csv", fit_report_csv(result.report));
  std::vector<Matrix> ws;
  for (std::size_t v = 0; v < result.state.num_views(); ++v) {
    ws.push_back(result.state.views[v].w);
    csv::write_matrix(out / ("W_" + std::to_string(v + 1) + ".csv"), result.state.views[v].w);
    csv::write_matrix(out / ("xhat_" + std::to_string(v + 1) + ".csv"), result.state.views[v].xhat);
  }
  csv::write_matrix(out / "omega.csv", result.state.omega);
  csv::write_text(out / "ranking.json", ranking_json(rank_features(ws)));

  const auto& c = result.report.constraints;
  ordered_json report;
  report["iterations"] = result.report.iterations;
  report["converged"] = result.report.converged;
  report["initial"] = objective_json(result.report.initial);
  report["final"] = objective_json(result.report.history.empty() ? result.report.initial
                                                                  : result.report.history.back().objective);
  report["constraints"] = {{"pinning", c.pinning},           {"min_factor", c.min_factor},
                           {"omega_simplex", c.omega_simplex}, {"graph_simplex", c.graph_simplex},
                           {"graph_diagonal", c.graph_diagonal}, {"graph_min", c.graph_min}};
  report["warnings"] = result.report.warnings;
  report["notes"] = result.report.notes;
  csv::write_text(out / "report.json", report.dump(2) + "\n");
}

int emit_error(std::string_view kind, const std::string& message) {
  ordered_json err;
  err["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << err.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensorized unsupervised feature selection for incomplete multi-view data"};
  app.require_subcommand(1);

  // synth
  DataArgs synth_args;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a planted multi-view dataset");
  add_data_options(synth, synth_args);
  synth->add_option("--out", synth_out, "Output directory")->required();

  // fit
  DataArgs fit_data;
  FitArgs fit_args;
  std::string fit_out = "trustfs_fit";
  auto* fitc = app.add_subcommand("fit", "Fit one model and write factors, ranking and report");
  add_data_options(fitc, fit_data);
  add_fit_options(fitc, fit_args);
  fitc->add_option("--out", fit_out, "Output directory");

  // dump-graphs
  DataArgs dump_data;
  FitArgs dump_args;
  std::string dump_out = "trustfs_graphs";
  auto* dump = app.add_subcommand("dump-graphs", "Fit and write the learned graphs and belief masses");
  add_data_options(dump, dump_data);
  add_fit_options(dump, dump_args);
  dump->add_option("--out", dump_out, "Output directory");

  // eval
  DataArgs eval_data;
  std::string eval_ranking;
  std::string eval_xhat_dir;
  EvalOptions eval_options;
  bool eval_mean_imputed = false;
  auto* evalc = app.add_subcommand("eval", "Cluster on the top-ranked features and report ACC/NMI");
  add_data_options(evalc, eval_data);
  evalc->add_option("--ranking", eval_ranking, "ranking.json from fit; variance ranking if omitted");
  evalc->add_option("--ratios", eval_options.ratios, "Feature ratios")->delimiter(',');
  evalc->add_option("--repeats", eval_options.repeats, "k-means repeats per ratio");
  evalc->add_option("--restarts", eval_options.restarts, "k-means++ restarts per repeat");
  evalc->add_option("--clusters", eval_options.clusters, "Cluster count (0 = label classes)");
  evalc->add_option("--seed", eval_options.seed, "Evaluation seed");
  evalc->add_option("--xhat-dir", eval_xhat_dir, "Directory with xhat_<v>.csv to cluster on instead of mean-imputed data");
  evalc->add_flag("--mean-imputed", eval_mean_imputed, "Cluster on mean-imputed data (default when no --xhat-dir)");

  // sweep / ablate
  std::string sweep_config, sweep_out;
  int sweep_threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Grid search over missing ratios and hyperparameters");
  sweep->add_option("--config", sweep_config, "Experiment config file")->required();
  sweep->add_option("--out", sweep_out, "Override output_dir");
  sweep->add_option("--threads", sweep_threads, "Override threads");

  std::string ablate_config, ablate_out;
  int ablate_threads = 0;
  auto* ablate = app.add_subcommand("ablate", "Run the full model and the three ablation variants");
  ablate->add_option("--config", ablate_config, "Experiment config file")->required();
  ablate->add_option("--out", ablate_out, "Override output_dir");
  ablate->add_option("--threads", ablate_threads, "Override threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error("usage", e.what());
  }

  try {
    ordered_json out;
    if (synth->parsed()) {
      SyntheticSpec spec{synth_args.synth_features, synth_args.synth_samples, synth_args.synth_classes,
                         synth_args.synth_informative, synth_args.synth_noise, synth_args.synth_seed};
      SyntheticData generated = synth_generate(spec);
      MultiViewDataset data = generated.dataset;
      if (synth_args.missing > 0.0) {
        data = inject_missing(data, synth_args.missing, synth_args.missing_seed,
                              MissingOptions{synth_args.per_view_missing, 100});
      }
      save_dataset(data, synth_out);
      std::string informative = "view,feature\n";
      for (const auto& f : generated.informative) {
        informative += std::to_string(f.view + 1) + "," + std::to_string(f.feature) + "\n";
      }
      csv::write_text(fs::path(synth_out) / "informative.csv", informative);
      out = {{"command", "synth"}, {"out", synth_out}, {"views", data.num_views()},
             {"samples", data.num_samples()}, {"missing_cells", data.missing_count()}};
    } else if (fitc->parsed() || dump->parsed()) {
      const bool is_fit = fitc->parsed();
      const MultiViewDataset data = load_data(is_fit ? fit_data : dump_data);
      const FitArgs& args = is_fit ? fit_args : dump_args;
      const FitResult result = fit(data, args.hp, to_options(args));
      const fs::path dir = is_fit ? fit_out : dump_out;
      if (is_fit) {
        write_fit_outputs(result, dir);
      } else {
        dump_graphs(result.state, dir);
      }
      out = {{"command", is_fit ? "fit" : "dump-graphs"},
             {"out", dir.string()},
             {"iterations", result.report.iterations},
             {"converged", result.report.converged}};
    } else if (evalc->parsed()) {
      const MultiViewDataset data = load_data(eval_data);
      const MultiViewDataset imputed = mean_impute(data);
      std::vector<Matrix> values = imputed.views();
      if (!eval_xhat_dir.empty() && !eval_mean_imputed) {
        for (std::size_t v = 0; v < data.num_views(); ++v) {
          values[v] = csv::read_matrix(fs::path(eval_xhat_dir) / ("xhat_" + std::to_string(v + 1) + ".csv"));
        }
      }
      const Ranking ranking =
          eval_ranking.empty() ? rank_by_variance(values) : parse_ranking_json(read_file(eval_ranking));
      const SelectionResult result = evaluate_selection(data, values, ranking, eval_options);
      std::cout << selection_json(result);
      return 0;
    } else if (sweep->parsed() || ablate->parsed()) {
      const bool is_sweep = sweep->parsed();
      ExperimentConfig cfg = load_config(is_sweep ? sweep_config : ablate_config);
      const std::string& dir = is_sweep ? sweep_out : ablate_out;
      const int threads = is_sweep ? sweep_threads : ablate_threads;
      if (!dir.empty()) cfg.output_dir = dir;
      if (threads > 0) cfg.threads = threads;
      if (is_sweep) {
        const ExperimentSummary summary = run_experiment(cfg);
        std::size_t failed = 0;
        for (const auto& cell : summary.cells) failed += cell.ok ? 0 : 1;
        out = {{"command", "sweep"}, {"out", cfg.output_dir.string()},
               {"cells", summary.cells.size()}, {"failed_cells", failed}};
      } else {
        const AblationReport report = run_ablation(cfg);
        ordered_json rows = ordered_json::array();
        for (const auto& row : report.rows) {
          rows.push_back({{"variant", to_string(row.variant)}, {"acc_mean", row.metrics.acc_mean},
                          {"nmi_mean", row.metrics.nmi_mean},
                          {"full_at_least_as_good", row.full_at_least_as_good}});
        }
        out = {{"command", "ablate"}, {"out", cfg.output_dir.string()}, {"rows", rows}};
      }
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    return emit_error(to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return emit_error("internal", e.what());
  }
}
