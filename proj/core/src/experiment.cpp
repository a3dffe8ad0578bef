#include "trustfs/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "trustfs/csv.hpp"
#include "trustfs/error.hpp"

namespace trustfs {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string_view to_string(RunVariant variant) {
  switch (variant) {
    case RunVariant::kFull: return "full";
    case RunVariant::kVariantI: return "variant-I";
    case RunVariant::kVariantII: return "variant-II";
    case RunVariant::kVariantIII: return "variant-III";
    case RunVariant::kBaselineTwoStep: return "baseline-two-step";
    case RunVariant::kAllFeatures: return "allfea";
  }
  return "unknown";
}

RunVariant parse_variant(std::string_view text) {
  for (auto v : {RunVariant::kFull, RunVariant::kVariantI, RunVariant::kVariantII,
                 RunVariant::kVariantIII, RunVariant::kBaselineTwoStep, RunVariant::kAllFeatures}) {
    if (text == to_string(v)) return v;
  }
  throw Error(ErrorKind::kParse, "unknown variant '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::kInvalidArgument, what);
  };
  require(!missing_ratios.empty(), "missing_ratios must not be empty");
  require(!feature_ratios.empty(), "feature_ratios must not be empty");
  require(!gammas.empty() && !lambdas.empty() && !taus.empty(), "hyperparameter grids must not be empty");
  require(!seeds.empty(), "seeds must not be empty");
  require(threads >= 1, "threads must be >= 1");
  for (double m : missing_ratios) require(m >= 0.0 && m < 1.0, "missing ratios must lie in [0, 1)");
  for (double f : feature_ratios) require(f > 0.0 && f <= 1.0, "feature ratios must lie in (0, 1]");
  for (double g : gammas) require(g > 1.0, "gamma values must be > 1");
  for (double l : lambdas) require(l >= 0.0, "lambda values must be >= 0");
  for (double t : taus) require(t >= 0.0, "tau values must be >= 0");
  if (!data_dir) synthetic.validate();
}

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<double> parse_list(std::string_view value) {
  value = strip(value);
  if (!value.empty() && value.front() == '[') value.remove_prefix(1);
  if (!value.empty() && value.back() == ']') value.remove_suffix(1);
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    const std::string_view item = strip(value.substr(start, comma - start));
    if (!item.empty()) out.push_back(csv::parse_double(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_bool(std::string_view value) {
  value = strip(value);
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw Error(ErrorKind::kParse, "expected a boolean, got '" + std::string(value) + "'");
}

template <typename Int>
Int parse_int(std::string_view value) {
  const double d = csv::parse_double(value);
  if (d != std::floor(d)) throw Error(ErrorKind::kParse, "expected an integer, got '" + std::string(value) + "'");
  return static_cast<Int>(d);
}

template <typename Int>
std::vector<Int> parse_int_list(std::string_view value) {
  std::vector<Int> out;
  for (double d : parse_list(value)) {
    if (d != std::floor(d) || d < 0) throw Error(ErrorKind::kParse, "expected non-negative integers");
    out.push_back(static_cast<Int>(d));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  using Setter = std::function<void(std::string_view)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"data_dir", [&](auto v) { cfg.data_dir = fs::path(std::string(strip(v))); }},
      {"synth_features", [&](auto v) { cfg.synthetic.features_per_view = parse_int_list<Eigen::Index>(v); }},
      {"synth_samples", [&](auto v) { cfg.synthetic.samples = parse_int<Eigen::Index>(v); }},
      {"synth_classes", [&](auto v) { cfg.synthetic.classes = parse_int<int>(v); }},
      {"synth_informative", [&](auto v) { cfg.synthetic.informative_per_view = parse_int<Eigen::Index>(v); }},
      {"synth_noise", [&](auto v) { cfg.synthetic.noise = csv::parse_double(v); }},
      {"synth_seed", [&](auto v) { cfg.synthetic.seed = parse_int<std::uint64_t>(v); }},
      {"missing_ratios", [&](auto v) { cfg.missing_ratios = parse_list(v); }},
      {"feature_ratios", [&](auto v) { cfg.feature_ratios = parse_list(v); }},
      {"gammas", [&](auto v) { cfg.gammas = parse_list(v); }},
      {"lambdas", [&](auto v) { cfg.lambdas = parse_list(v); }},
      {"taus", [&](auto v) { cfg.taus = parse_list(v); }},
      {"seeds", [&](auto v) { cfg.seeds = parse_int_list<std::uint64_t>(v); }},
      {"variant", [&](auto v) { cfg.variant = parse_variant(strip(v)); }},
      {"c", [&](auto v) { cfg.base.c = parse_int<int>(v); }},
      {"r", [&](auto v) { cfg.base.r = parse_int<int>(v); }},
      {"knn_k", [&](auto v) { cfg.base.knn_k = parse_int<int>(v); }},
      {"max_iter", [&](auto v) { cfg.base.max_iter = parse_int<int>(v); }},
      {"tol", [&](auto v) { cfg.base.tol = csv::parse_double(v); }},
      {"epsilon", [&](auto v) { cfg.base.epsilon = csv::parse_double(v); }},
      {"eval_repeats", [&](auto v) { cfg.eval.repeats = parse_int<int>(v); }},
      {"eval_restarts", [&](auto v) { cfg.eval.restarts = parse_int<int>(v); }},
      {"symmetric_graph_terms", [&](auto v) { cfg.symmetric_graph_terms = parse_bool(v); }},
      {"evaluate_on_mean_imputed", [&](auto v) { cfg.evaluate_on_mean_imputed = parse_bool(v); }},
      {"per_view_missing", [&](auto v) { cfg.per_view_missing = parse_bool(v); }},
      {"global_grid", [&](auto v) { cfg.global_grid = parse_bool(v); }},
      {"plot_missing_ratio", [&](auto v) { cfg.plot_missing_ratio = csv::parse_double(v); }},
      {"plot_feature_ratio", [&](auto v) { cfg.plot_feature_ratio = csv::parse_double(v); }},
      {"output_dir", [&](auto v) { cfg.output_dir = fs::path(std::string(strip(v))); }},
      {"threads", [&](auto v) { cfg.threads = parse_int<int>(v); }},
  };

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::kParse, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = strip(line.substr(0, eq));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw Error(ErrorKind::kParse, "config line " + std::to_string(line_no) + ": unknown key '" +
                                         std::string(key) + "'");
    }
    it->second(line.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string fit_report_csv(const FitReport& report) {
  std::string out = "iteration,total,fit,sparsity,smoothness,consensus\n";
  auto row = [&](int iteration, const ObjectiveValue& v) {
    out += std::to_string(iteration) + "," + csv::format_double(v.total) + "," +
           csv::format_double(v.fit) + "," + csv::format_double(v.sparsity) + "," +
           csv::format_double(v.smoothness) + "," + csv::format_double(v.consensus) + "\n";
  };
  row(0, report.initial);
  for (const auto& record : report.history) row(record.iteration, record.objective);
  return out;
}

namespace {

ordered_json ranking_to_json(const Ranking& ranking) {
  ordered_json out = ordered_json::array();
  for (const auto& f : ranking) {
    out.push_back({{"view", f.view + 1}, {"feature", f.feature}, {"score", f.score}});
  }
  return out;
}

}  // namespace

std::string selection_json(const SelectionResult& result) {
  ordered_json j;
  ordered_json ratios = ordered_json::array(), selected = ordered_json::array(),
               acc_mean = ordered_json::array(), acc_std = ordered_json::array(),
               nmi_mean = ordered_json::array(), nmi_std = ordered_json::array();
  for (const auto& m : result.metrics) {
    ratios.push_back(m.ratio);
    selected.push_back(m.selected);
    acc_mean.push_back(m.acc_mean);
    acc_std.push_back(m.acc_std);
    nmi_mean.push_back(m.nmi_mean);
    nmi_std.push_back(m.nmi_std);
  }
  j["ratios"] = ratios;
  j["selected"] = selected;
  j["acc_mean"] = acc_mean;
  j["acc_std"] = acc_std;
  j["nmi_mean"] = nmi_mean;
  j["nmi_std"] = nmi_std;
  j["ranking"] = ranking_to_json(result.ranking);
  return j.dump(2) + "\n";
}

std::string ranking_json(const Ranking& ranking) {
  ordered_json j;
  j["ranking"] = ranking_to_json(ranking);
  return j.dump(2) + "\n";
}

Ranking parse_ranking_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("ranking json: ") + e.what());
  }
  if (!j.contains("ranking") || !j["ranking"].is_array()) {
    throw Error(ErrorKind::kParse, "ranking json: missing 'ranking' array");
  }
  Ranking ranking;
  for (const auto& item : j["ranking"]) {
    const auto view = item.at("view").get<std::int64_t>();
    if (view < 1) throw Error(ErrorKind::kParse, "ranking json: view ids start at 1");
    ranking.push_back({static_cast<std::size_t>(view - 1), item.at("feature").get<Eigen::Index>(),
                       item.value("score", 0.0)});
  }
  return ranking;
}

RatioMetrics pool_metrics(std::span<const RatioMetrics> runs) {
  RatioMetrics out;
  if (runs.empty()) {
    out.acc_mean = out.acc_std = out.nmi_mean = out.nmi_std = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.ratio = runs.front().ratio;
  out.selected = runs.front().selected;
  double acc_sq = 0.0, nmi_sq = 0.0;
  for (const auto& r : runs) {
    out.acc_mean += r.acc_mean;
    out.nmi_mean += r.nmi_mean;
    acc_sq += r.acc_std * r.acc_std + r.acc_mean * r.acc_mean;
    nmi_sq += r.nmi_std * r.nmi_std + r.nmi_mean * r.nmi_mean;
  }
  const auto count = static_cast<double>(runs.size());
  out.acc_mean /= count;
  out.nmi_mean /= count;
  out.acc_std = std::sqrt(std::max(0.0, acc_sq / count - out.acc_mean * out.acc_mean));
  out.nmi_std = std::sqrt(std::max(0.0, nmi_sq / count - out.nmi_mean * out.nmi_mean));
  return out;
}

std::vector<fs::path> dump_graphs(const ModelState& state, const fs::path& outdir) {
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + outdir.string());
  std::vector<fs::path> files;
  for (std::size_t v = 0; v < state.num_views(); ++v) {
    files.push_back(outdir / ("S_" + std::to_string(v + 1) + ".csv"));
    csv::write_matrix(files.back(), state.views[v].graph.weights);
  }
  files.push_back(outdir / "belief.csv");
  csv::write_matrix(files.back(), state.belief.belief);
  files.push_back(outdir / "uncertainty.csv");
  csv::write_matrix(files.back(), state.belief.uncertainty);
  return files;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool needs_fit(RunVariant variant) {
  return variant != RunVariant::kBaselineTwoStep && variant != RunVariant::kAllFeatures;
}

SolverOptions solver_options(const ExperimentConfig& cfg) {
  SolverOptions options;
  switch (cfg.variant) {
    case RunVariant::kVariantI: options = options_for(Variant::kNoImputation); break;
    case RunVariant::kVariantII: options = options_for(Variant::kStandardCp); break;
    case RunVariant::kVariantIII: options = options_for(Variant::kFixedGraph); break;
    default: break;
  }
  options.symmetric_graph_terms = cfg.symmetric_graph_terms;
  return options;
}

std::string cell_tag(const CellResult& cell) {
  return "m" + std::to_string(cell.missing_index) + "_g" + std::to_string(cell.grid_index) + "_s" +
         std::to_string(cell.seed);
}

void run_cell(const ExperimentConfig& cfg, const MultiViewDataset& base, const GridPoint& grid,
              CellResult& cell, const fs::path& run_dir) {
  const double missing = cfg.missing_ratios[cell.missing_index];
  const MultiViewDataset data =
      inject_missing(base, missing, mix_seed(cell.seed, cell.missing_index),
                     MissingOptions{cfg.per_view_missing, 100});
  const MultiViewDataset imputed = mean_impute(data);

  EvalOptions eval = cfg.eval;
  eval.ratios = cfg.feature_ratios;
  eval.seed = cell.seed;

  if (cfg.variant == RunVariant::kAllFeatures) {
    Ranking all;
    for (std::size_t v = 0; v < imputed.num_views(); ++v) {
      for (Eigen::Index i = 0; i < imputed.num_features(v); ++i) all.push_back({v, i, 1.0});
    }
    EvalOptions once = eval;
    once.ratios = {1.0};
    SelectionResult full = evaluate_selection(imputed, imputed.views(), all, once);
    SelectionResult result;
    result.ranking = all;
    for (double ratio : cfg.feature_ratios) {
      RatioMetrics m = full.metrics.front();
      m.ratio = ratio;
      result.metrics.push_back(m);
    }
    cell.selection = std::move(result);
  } else if (cfg.variant == RunVariant::kBaselineTwoStep) {
    const Ranking ranking = rank_by_variance(imputed.views());
    cell.selection = evaluate_selection(imputed, imputed.views(), ranking, eval);
  } else {
    Hyperparams hp = cfg.base;
    hp.gamma = grid.gamma;
    hp.lambda = grid.lambda;
    hp.tau = grid.tau;
    hp.seed = cell.seed;
    FitResult fitted = fit(data, hp, solver_options(cfg));
    std::vector<Matrix> ws, xhats;
    for (const auto& view : fitted.state.views) {
      ws.push_back(view.w);
      xhats.push_back(view.xhat);
    }
    const Ranking ranking = rank_features(ws);
    const std::vector<Matrix>& values = cfg.evaluate_on_mean_imputed ? imputed.views() : xhats;
    cell.selection = evaluate_selection(data, values, ranking, eval);
    csv::write_text(run_dir / (cell_tag(cell) + "_fit.csv"), fit_report_csv(fitted.report));
    cell.report = std::move(fitted.report);
  }
  csv::write_text(run_dir / (cell_tag(cell) + "_selection.json"), selection_json(*cell.selection));
  cell.ok = true;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& worker : pool) worker.join();
}

std::size_t nearest_index(const std::vector<double>& values, double target) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (std::abs(values[i] - target) < std::abs(values[best] - target)) best = i;
  }
  return best;
}

std::string metrics_header() { return "acc_mean,acc_std,nmi_mean,nmi_std"; }

std::string metrics_fields(const RatioMetrics& m) {
  return csv::format_double(m.acc_mean) + "," + csv::format_double(m.acc_std) + "," +
         csv::format_double(m.nmi_mean) + "," + csv::format_double(m.nmi_std);
}

std::string grid_fields(const GridPoint& g) {
  return csv::format_double(g.gamma) + "," + csv::format_double(g.lambda) + "," + csv::format_double(g.tau);
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::error_code ec;
  const fs::path run_dir = cfg.output_dir / "runs";
  fs::create_directories(run_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create output directory " + run_dir.string());

  MultiViewDataset raw = cfg.data_dir ? load_dataset(*cfg.data_dir) : synth_generate(cfg.synthetic).dataset;
  if (!raw.labels()) throw Error(ErrorKind::kInvalidArgument, "experiments need labelled data");
  const MultiViewDataset base = normalize_views(raw);

  ExperimentSummary summary;
  if (needs_fit(cfg.variant)) {
    for (double g : cfg.gammas) {
      for (double l : cfg.lambdas) {
        for (double t : cfg.taus) summary.grid.push_back({g, l, t});
      }
    }
  } else {
    summary.grid.push_back({});
  }

  for (std::size_t m = 0; m < cfg.missing_ratios.size(); ++m) {
    for (std::size_t g = 0; g < summary.grid.size(); ++g) {
      for (std::uint64_t seed : cfg.seeds) {
        CellResult cell;
        cell.missing_index = m;
        cell.grid_index = g;
        cell.seed = seed;
        summary.cells.push_back(std::move(cell));
      }
    }
  }

  parallel_for(summary.cells.size(), cfg.threads, [&](std::size_t i) {
    CellResult& cell = summary.cells[i];
    try {
      run_cell(cfg, base, summary.grid[cell.grid_index], cell, run_dir);
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
      ordered_json err;
      err["error"] = {{"kind", "cell_failed"}, {"message", cell.error}};
      try {
        csv::write_text(run_dir / (cell_tag(cell) + "_error.json"), err.dump(2) + "\n");
      } catch (const Error&) {
      }
    }
  });

  // Pooled metrics per (missing ratio, grid point, feature ratio) over seeds.
  const std::size_t num_m = cfg.missing_ratios.size();
  const std::size_t num_g = summary.grid.size();
  const std::size_t num_f = cfg.feature_ratios.size();
  std::vector<RatioMetrics> pooled(num_m * num_g * num_f);
  std::vector<double> score(num_m * num_g, -1.0);
  for (std::size_t m = 0; m < num_m; ++m) {
    for (std::size_t g = 0; g < num_g; ++g) {
      double acc_sum = 0.0;
      bool any = false;
      for (std::size_t f = 0; f < num_f; ++f) {
        std::vector<RatioMetrics> runs;
        for (const auto& cell : summary.cells) {
          if (cell.ok && cell.missing_index == m && cell.grid_index == g) {
            runs.push_back(cell.selection->metrics[f]);
          }
        }
        RatioMetrics p = pool_metrics(runs);
        p.ratio = cfg.feature_ratios[f];
        pooled[(m * num_g + g) * num_f + f] = p;
        if (!runs.empty()) {
          acc_sum += p.acc_mean;
          any = true;
        }
      }
      if (any) score[m * num_g + g] = acc_sum / static_cast<double>(num_f);
    }
  }

  std::vector<std::size_t> best_grid(num_m, 0);
  if (cfg.global_grid) {
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < num_g; ++g) {
      double total = 0.0;
      for (std::size_t m = 0; m < num_m; ++m) total += score[m * num_g + g];
      if (total > best_score) {
        best_score = total;
        best = g;
      }
    }
    std::fill(best_grid.begin(), best_grid.end(), best);
  } else {
    for (std::size_t m = 0; m < num_m; ++m) {
      for (std::size_t g = 1; g < num_g; ++g) {
        if (score[m * num_g + g] > score[m * num_g + best_grid[m]]) best_grid[m] = g;
      }
    }
  }

  std::string summary_csv = "missing_ratio,feature_ratio,gamma,lambda,tau," + metrics_header() + ",failed_runs\n";
  for (std::size_t m = 0; m < num_m; ++m) {
    const std::size_t g = best_grid[m];
    std::size_t failed = 0;
    for (const auto& cell : summary.cells) {
      if (!cell.ok && cell.missing_index == m && cell.grid_index == g) ++failed;
    }
    for (std::size_t f = 0; f < num_f; ++f) {
      SweepRow row{cfg.missing_ratios[m], summary.grid[g], pooled[(m * num_g + g) * num_f + f]};
      summary.best.push_back(row);
      summary_csv += csv::format_double(row.missing_ratio) + "," + csv::format_double(row.metrics.ratio) +
                     "," + grid_fields(row.grid) + "," + metrics_fields(row.metrics) + "," +
                     std::to_string(failed) + "\n";
    }
  }
  csv::write_text(cfg.output_dir / "summary.csv", summary_csv);

  const std::size_t plot_m = nearest_index(cfg.missing_ratios, cfg.plot_missing_ratio);
  const std::size_t plot_f = nearest_index(cfg.feature_ratios, cfg.plot_feature_ratio);
  std::string feature_csv = "missing_ratio,feature_ratio,gamma,lambda,tau," + metrics_header() + "\n";
  for (std::size_t f = 0; f < num_f; ++f) {
    const SweepRow& row = summary.best[plot_m * num_f + f];
    summary.feature_sweep.push_back(row);
    feature_csv += csv::format_double(row.missing_ratio) + "," + csv::format_double(row.metrics.ratio) +
                   "," + grid_fields(row.grid) + "," + metrics_fields(row.metrics) + "\n";
  }
  csv::write_text(cfg.output_dir / "sweep_feature_ratio.csv", feature_csv);

  std::string missing_csv = feature_csv.substr(0, feature_csv.find('\n') + 1);
  for (std::size_t m = 0; m < num_m; ++m) {
    const SweepRow& row = summary.best[m * num_f + plot_f];
    summary.missing_sweep.push_back(row);
    missing_csv += csv::format_double(row.missing_ratio) + "," + csv::format_double(row.metrics.ratio) +
                   "," + grid_fields(row.grid) + "," + metrics_fields(row.metrics) + "\n";
  }
  csv::write_text(cfg.output_dir / "sweep_missing_ratio.csv", missing_csv);
  return summary;
}

AblationReport run_ablation(const ExperimentConfig& cfg) {
  cfg.validate();
  AblationReport report;
  const std::size_t plot_m = [&] {
    std::size_t best = 0;
    for (std::size_t i = 1; i < cfg.missing_ratios.size(); ++i) {
      if (std::abs(cfg.missing_ratios[i] - cfg.plot_missing_ratio) <
          std::abs(cfg.missing_ratios[best] - cfg.plot_missing_ratio)) {
        best = i;
      }
    }
    return best;
  }();

  for (auto variant : {RunVariant::kFull, RunVariant::kVariantI, RunVariant::kVariantII,
                       RunVariant::kVariantIII}) {
    ExperimentConfig sub = cfg;
    sub.variant = variant;
    sub.output_dir = cfg.output_dir / std::string(to_string(variant));
    const ExperimentSummary summary = run_experiment(sub);

    AblationRow row;
    row.variant = variant;
    row.metrics = summary.missing_sweep[plot_m].metrics;
    row.has_consensus = variant != RunVariant::kVariantIII;
    const GridPoint& grid = summary.missing_sweep[plot_m].grid;
    int count = 0;
    for (const auto& cell : summary.cells) {
      if (!cell.ok || cell.missing_index != plot_m || !cell.report) continue;
      const GridPoint& g = summary.grid[cell.grid_index];
      if (g.gamma != grid.gamma || g.lambda != grid.lambda || g.tau != grid.tau) continue;
      const ObjectiveValue& last =
          cell.report->history.empty() ? cell.report->initial : cell.report->history.back().objective;
      row.final_objective.total += last.total;
      row.final_objective.fit += last.fit;
      row.final_objective.sparsity += last.sparsity;
      row.final_objective.smoothness += last.smoothness;
      row.final_objective.consensus += last.consensus;
      ++count;
    }
    if (count > 0) {
      const double c = count;
      row.final_objective.total /= c;
      row.final_objective.fit /= c;
      row.final_objective.sparsity /= c;
      row.final_objective.smoothness /= c;
      row.final_objective.consensus /= c;
    }
    report.rows.push_back(row);
  }
  const double full_acc = report.rows.front().metrics.acc_mean;
  for (auto& row : report.rows) row.full_at_least_as_good = full_acc >= row.metrics.acc_mean;

  std::string out = "variant,missing_ratio,feature_ratio," + metrics_header() +
                    ",objective,fit,sparsity,smoothness,consensus,full_at_least_as_good\n";
  for (const auto& row : report.rows) {
    out += std::string(to_string(row.variant)) + "," + csv::format_double(cfg.missing_ratios[plot_m]) +
           "," + csv::format_double(row.metrics.ratio) + "," + metrics_fields(row.metrics) + "," +
           csv::format_double(row.final_objective.total) + "," + csv::format_double(row.final_objective.fit) +
           "," + csv::format_double(row.final_objective.sparsity) + "," +
           csv::format_double(row.final_objective.smoothness) + "," +
           (row.has_consensus ? csv::format_double(row.final_objective.consensus) : std::string()) + "," +
           (row.full_at_least_as_good ? "true" : "false") + "\n";
  }
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  csv::write_text(cfg.output_dir / "ablation.csv", out);
  return report;
}

}  // namespace trustfs
