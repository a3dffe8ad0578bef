#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trustfs/types.hpp"

namespace trustfs {

// A set of V >= 2 views over the same n samples. Each view is a d_v x n matrix
// (rows are features, columns samples) paired with a 0/1 mask where 0 marks a
// missing entry. Missing entries hold a 0 placeholder that is only ever read
// through the mask.
class MultiViewDataset {
 public:
  MultiViewDataset() = default;

  // Throws trustfs::Error if the invariants do not hold.
  MultiViewDataset(std::vector<Matrix> views, std::vector<Mask> masks,
                   std::optional<std::vector<int>> labels = std::nullopt,
                   std::vector<std::string> names = {});

  std::size_t num_views() const { return views_.size(); }
  Eigen::Index num_samples() const { return views_.empty() ? 0 : views_.front().cols(); }
  Eigen::Index num_features(std::size_t v) const { return views_[v].rows(); }
  Eigen::Index total_features() const;

  const Matrix& view(std::size_t v) const { return views_[v]; }
  const Mask& mask(std::size_t v) const { return masks_[v]; }
  const std::vector<Matrix>& views() const { return views_; }
  const std::vector<Mask>& masks() const { return masks_; }
  const std::optional<std::vector<int>>& labels() const { return labels_; }
  const std::vector<std::string>& names() const { return names_; }

  std::size_t missing_count() const;
  bool is_complete() const { return missing_count() == 0; }

 private:
  std::vector<Matrix> views_;
  std::vector<Mask> masks_;
  std::optional<std::vector<int>> labels_;
  std::vector<std::string> names_;
};

// Row index of a planted feature inside a synthetic view.
struct FeatureId {
  std::size_t view = 0;
  Eigen::Index feature = 0;

  friend bool operator==(const FeatureId&, const FeatureId&) = default;
  friend auto operator<=>(const FeatureId&, const FeatureId&) = default;
};

struct SyntheticSpec {
  std::vector<Eigen::Index> features_per_view;  // d_v, its size is V
  Eigen::Index samples = 60;
  int classes = 3;
  Eigen::Index informative_per_view = 5;
  double noise = 0.05;
  std::uint64_t seed = 0;

  // Throws trustfs::Error when the spec is inconsistent.
  void validate() const;
};

struct SyntheticData {
  MultiViewDataset dataset;
  std::vector<FeatureId> informative;
};

enum class DatasetFormat { kCsvDir };

// csv-dir layout: meta.json, view_<i>.csv, optional mask_<i>.csv, optional
// labels.csv, with i starting at 1.
MultiViewDataset load_dataset(const std::filesystem::path& dir,
                              DatasetFormat format = DatasetFormat::kCsvDir);
void save_dataset(const MultiViewDataset& data, const std::filesystem::path& dir);

// Min-max scales each feature row to [0, 1] over its observed entries and
// resets missing cells to the 0 placeholder. A constant row maps to 0.5; a row
// with no observed entries is rejected.
MultiViewDataset normalize_views(const MultiViewDataset& data);

struct MissingOptions {
  // Draw floor(ratio * d_v * n) cells per view instead of pooling all views.
  bool per_view = false;
  int max_attempts = 100;
};

// Removes exactly floor(ratio * sum_v d_v * n) entries, drawn uniformly
// without replacement. Input must be complete.
MultiViewDataset inject_missing(const MultiViewDataset& data, double ratio, std::uint64_t seed,
                                const MissingOptions& options = {});

// Replaces each missing entry by the observed mean of its feature row. Masks
// are kept so that callers can still tell imputed from observed cells.
MultiViewDataset mean_impute(const MultiViewDataset& data);

SyntheticData synth_generate(const SyntheticSpec& spec);

// Stacks views vertically into one (sum of d_v) x n matrix.
Matrix stack_views(const std::vector<Matrix>& views);

}  // namespace trustfs
