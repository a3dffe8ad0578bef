#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trustfs/csv.hpp"
#include "trustfs/error.hpp"
#include "trustfs/experiment.hpp"

using namespace trustfs;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small_config(const fs::path& out) {
  ExperimentConfig cfg = parse_config(R"(
    # tiny grid
    synth_features = 6, 6
    synth_samples = 24
    synth_classes = 2
    synth_informative = 2
    missing_ratios = [0.2, 0.4]
    feature_ratios = 0.25, 0.5
    gammas = 2
    lambdas = 0.1, 1
    taus = 1
    seeds = 0, 1
    max_iter = 8
    knn_k = 3
    eval_repeats = 2
    eval_restarts = 2
  )");
  cfg.output_dir = out;
  return cfg;
}

}  // namespace

TEST(Config, ParsesListsAndScalars) {
  const ExperimentConfig cfg = parse_config("gammas = [2, 3]\nvariant = variant-II\nthreads = 3 # comment\n");
  EXPECT_EQ(cfg.gammas, (std::vector<double>{2, 3}));
  EXPECT_EQ(cfg.variant, RunVariant::kVariantII);
  EXPECT_EQ(cfg.threads, 3);
  EXPECT_EQ(cfg.missing_ratios.size(), 5u);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("nonsense = 1"), Error);
  EXPECT_THROW(parse_config("gammas"), Error);
  EXPECT_THROW(parse_config("missing_ratios = 1.5"), Error);
  EXPECT_THROW(parse_config("gammas = []"), Error);
  EXPECT_THROW(parse_config("variant = best"), Error);
}

TEST(PoolMetrics, PooledMoments) {
  std::vector<RatioMetrics> runs(2);
  runs[0].acc_mean = 0.5;
  runs[0].acc_std = 0.1;
  runs[1].acc_mean = 0.7;
  runs[1].acc_std = 0.1;
  const RatioMetrics p = pool_metrics(runs);
  EXPECT_DOUBLE_EQ(p.acc_mean, 0.6);
  EXPECT_NEAR(p.acc_std, std::sqrt(0.01 + 0.01), 1e-12);
}

TEST(RankingJson, RoundTrip) {
  Ranking r{{1, 3, 0.5}, {0, 0, 0.25}};
  const Ranking back = parse_ranking_json(ranking_json(r));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].view, 1u);
  EXPECT_EQ(back[0].feature, 3);
  EXPECT_EQ(back[1].score, 0.25);
  EXPECT_THROW(parse_ranking_json("{}"), Error);
}

TEST(RunExperiment, DeterministicOutputs) {
  const fs::path a = fs::temp_directory_path() / "trustfs_exp_a";
  const fs::path b = fs::temp_directory_path() / "trustfs_exp_b";
  fs::remove_all(a);
  fs::remove_all(b);
  ExperimentConfig ca = small_config(a), cb = small_config(b);
  cb.threads = 2;
  const ExperimentSummary sa = run_experiment(ca);
  run_experiment(cb);
  EXPECT_EQ(sa.cells.size(), 2u * 2u * 2u);
  for (const auto& cell : sa.cells) EXPECT_TRUE(cell.ok) << cell.error;
  for (const char* file : {"summary.csv", "sweep_feature_ratio.csv", "sweep_missing_ratio.csv"}) {
    EXPECT_EQ(slurp(a / file), slurp(b / file)) << file;
  }
  EXPECT_EQ(slurp(a / "runs" / "m1_g1_s1_selection.json"), slurp(b / "runs" / "m1_g1_s1_selection.json"));
  EXPECT_TRUE(fs::exists(a / "runs" / "m0_g0_s0_fit.csv"));
}

TEST(RunExperiment, SummaryIsReaggregationOfRuns) {
  const fs::path out = fs::temp_directory_path() / "trustfs_exp_agg";
  fs::remove_all(out);
  const ExperimentConfig cfg = small_config(out);
  const ExperimentSummary s = run_experiment(cfg);
  for (const SweepRow& row : s.best) {
    const auto m = static_cast<std::size_t>(
        std::find(cfg.missing_ratios.begin(), cfg.missing_ratios.end(), row.missing_ratio) - cfg.missing_ratios.begin());
    std::size_t g = 0;
    while (s.grid[g].lambda != row.grid.lambda) ++g;
    const std::size_t f = row.metrics.ratio == 0.25 ? 0 : 1;
    double mean = 0.0;
    int count = 0;
    for (const auto& cell : s.cells) {
      if (cell.missing_index == m && cell.grid_index == g) {
        mean += cell.selection->metrics[f].acc_mean;
        ++count;
      }
    }
    EXPECT_NEAR(row.metrics.acc_mean, mean / count, 1e-15);
  }
}

TEST(RunExperiment, AllFeaturesSkipsFitting) {
  const fs::path out = fs::temp_directory_path() / "trustfs_exp_allfea";
  fs::remove_all(out);
  ExperimentConfig cfg = small_config(out);
  cfg.variant = RunVariant::kAllFeatures;
  const ExperimentSummary s = run_experiment(cfg);
  EXPECT_EQ(s.grid.size(), 1u);
  for (const auto& cell : s.cells) {
    EXPECT_FALSE(cell.report.has_value());
    EXPECT_EQ(cell.selection->metrics[0].selected, 12u);
    EXPECT_EQ(cell.selection->metrics[0].acc_mean, cell.selection->metrics[1].acc_mean);
  }
  EXPECT_FALSE(fs::exists(out / "runs" / "m0_g0_s0_fit.csv"));
}

TEST(RunExperiment, FailedCellsAreIsolated) {
  const fs::path out = fs::temp_directory_path() / "trustfs_exp_fail";
  fs::remove_all(out);
  ExperimentConfig cfg = small_config(out);
  cfg.base.knn_k = 30;  // larger than n - 1: every fit fails
  const ExperimentSummary s = run_experiment(cfg);
  for (const auto& cell : s.cells) EXPECT_FALSE(cell.ok);
  EXPECT_TRUE(fs::exists(out / "runs" / "m0_g0_s0_error.json"));
  EXPECT_TRUE(fs::exists(out / "summary.csv"));
}

TEST(RunAblation, FourRowsAndConsensusFlag) {
  const fs::path out = fs::temp_directory_path() / "trustfs_exp_ablate";
  fs::remove_all(out);
  ExperimentConfig cfg = small_config(out);
  cfg.lambdas = {1};
  cfg.seeds = {0};
  const AblationReport r = run_ablation(cfg);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_FALSE(r.rows[3].has_consensus);
  EXPECT_TRUE(r.rows[0].full_at_least_as_good);
  const std::string csv_text = slurp(out / "ablation.csv");
  EXPECT_NE(csv_text.find("variant-III"), std::string::npos);
}

TEST(DumpGraphs, FilesAndColumnSums) {
  const fs::path out = fs::temp_directory_path() / "trustfs_dump";
  fs::remove_all(out);
  const SyntheticData s = synth_generate(SyntheticSpec{{5, 5, 5}, 20, 2, 2, 0.05, 1});
  Hyperparams hp;
  hp.max_iter = 5;
  hp.knn_k = 3;
  const FitResult r = fit(normalize_views(s.dataset), hp);
  const auto files = dump_graphs(r.state, out);
  EXPECT_EQ(files.size(), 5u);
  const Matrix s1 = csv::read_matrix(out / "S_1.csv");
  for (Eigen::Index i = 0; i < s1.cols(); ++i) EXPECT_NEAR(s1.col(i).sum(), 1.0, 1e-12);
  EXPECT_EQ(csv::read_matrix(out / "belief.csv"), r.state.belief.belief);
}
