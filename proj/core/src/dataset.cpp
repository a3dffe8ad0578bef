#include "trustfs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <limits>

#include <json.hpp>

#include "trustfs/csv.hpp"
#include "trustfs/error.hpp"

namespace trustfs {

namespace fs = std::filesystem;

MultiViewDataset::MultiViewDataset(std::vector<Matrix> views, std::vector<Mask> masks,
                                   std::optional<std::vector<int>> labels,
                                   std::vector<std::string> names)
    : views_(std::move(views)),
      masks_(std::move(masks)),
      labels_(std::move(labels)),
      names_(std::move(names)) {
  if (views_.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "a multi-view dataset needs at least 2 views");
  }
  if (masks_.empty()) {
    for (const auto& x : views_) masks_.push_back(Mask::Ones(x.rows(), x.cols()));
  }
  if (masks_.size() != views_.size()) {
    throw Error(ErrorKind::kShapeMismatch, "number of masks differs from number of views");
  }
  const Eigen::Index n = views_.front().cols();
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "dataset has no samples");
  for (std::size_t v = 0; v < views_.size(); ++v) {
    if (views_[v].cols() != n) {
      throw Error(ErrorKind::kShapeMismatch,
                  "sample count mismatch: view " + std::to_string(v + 1) + " has " +
                      std::to_string(views_[v].cols()) + " columns, expected " +
                      std::to_string(n));
    }
    if (views_[v].rows() < 1) {
      throw Error(ErrorKind::kInvalidArgument, "view " + std::to_string(v + 1) + " has no features");
    }
    if (masks_[v].rows() != views_[v].rows() || masks_[v].cols() != n) {
      throw Error(ErrorKind::kShapeMismatch, "mask shape differs from view " + std::to_string(v + 1));
    }
    if ((masks_[v].array() > 1).any()) {
      throw Error(ErrorKind::kInvalidArgument, "mask value outside {0,1}");
    }
    if (!views_[v].allFinite()) {
      throw Error(ErrorKind::kNonFinite, "view " + std::to_string(v + 1) + " has non-finite values");
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    bool observed = false;
    for (const auto& m : masks_) {
      if ((m.col(j).array() != 0).any()) {
        observed = true;
        break;
      }
    }
    if (!observed) {
      throw Error(ErrorKind::kFullyMissing, "sample " + std::to_string(j) + " is fully missing");
    }
  }
  if (labels_ && static_cast<Eigen::Index>(labels_->size()) != n) {
    throw Error(ErrorKind::kShapeMismatch, "label count differs from sample count");
  }
  if (names_.empty()) {
    for (std::size_t v = 0; v < views_.size(); ++v) names_.push_back("view_" + std::to_string(v + 1));
  }
  if (names_.size() != views_.size()) {
    throw Error(ErrorKind::kShapeMismatch, "number of names differs from number of views");
  }
}

Eigen::Index MultiViewDataset::total_features() const {
  Eigen::Index total = 0;
  for (const auto& x : views_) total += x.rows();
  return total;
}

std::size_t MultiViewDataset::missing_count() const {
  std::size_t count = 0;
  for (const auto& m : masks_) count += static_cast<std::size_t>((m.array() == 0).count());
  return count;
}

void SyntheticSpec::validate() const {
  if (features_per_view.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "synthetic spec needs at least 2 views");
  }
  if (samples < 1 || classes < 1 || classes > samples) {
    throw Error(ErrorKind::kInvalidArgument, "synthetic spec needs 1 <= classes <= samples");
  }
  if (informative_per_view < 0) {
    throw Error(ErrorKind::kInvalidArgument, "informative feature count must be >= 0");
  }
  for (auto d : features_per_view) {
    if (d < 1 || informative_per_view > d) {
      throw Error(ErrorKind::kInvalidArgument,
                  "informative feature count exceeds the view dimension");
    }
  }
  if (!(noise >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "noise level must be >= 0");
}

namespace {

fs::path view_file(const fs::path& dir, std::string_view stem, std::size_t v) {
  return dir / (std::string(stem) + "_" + std::to_string(v + 1) + ".csv");
}

Mask to_mask(const Matrix& m, const fs::path& file) {
  Mask mask(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double value = m(i, j);
      if (value != 0.0 && value != 1.0) {
        throw Error(ErrorKind::kInvalidArgument,
                    file.filename().string() + ": mask value outside {0,1}");
      }
      mask(i, j) = value == 1.0 ? 1 : 0;
    }
  }
  return mask;
}

}  // namespace

MultiViewDataset load_dataset(const fs::path& dir, DatasetFormat format) {
  if (format != DatasetFormat::kCsvDir) {
    throw Error(ErrorKind::kInvalidArgument, "unsupported dataset format");
  }
  const fs::path meta_path = dir / "meta.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw Error(ErrorKind::kIo, "cannot open " + meta_path.string());
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, "meta.json: " + std::string(e.what()));
  }
  if (!meta.contains("views") || !meta["views"].is_number_integer()) {
    throw Error(ErrorKind::kParse, "meta.json: missing integer field 'views'");
  }
  const auto num_views = meta["views"].get<std::int64_t>();
  if (num_views < 2) throw Error(ErrorKind::kInvalidArgument, "meta.json: views must be >= 2");

  std::vector<std::string> names;
  if (meta.contains("names")) names = meta["names"].get<std::vector<std::string>>();

  std::vector<Matrix> views;
  std::vector<Mask> masks;
  for (std::size_t v = 0; v < static_cast<std::size_t>(num_views); ++v) {
    const fs::path vf = view_file(dir, "view", v);
    Matrix x = csv::read_matrix(vf);
    const fs::path mf = view_file(dir, "mask", v);
    Mask mask = fs::exists(mf) ? to_mask(csv::read_matrix(mf), mf) : Mask::Ones(x.rows(), x.cols());
    if (mask.rows() != x.rows() || mask.cols() != x.cols()) {
      throw Error(ErrorKind::kShapeMismatch, mf.filename().string() + ": shape differs from view");
    }
    x = (mask.array() == 0).select(0.0, x);
    views.push_back(std::move(x));
    masks.push_back(std::move(mask));
  }
  if (meta.contains("n")) {
    const auto n = meta["n"].get<std::int64_t>();
    for (const auto& x : views) {
      if (x.cols() != n) throw Error(ErrorKind::kShapeMismatch, "sample count mismatch with meta.json");
    }
  }

  std::optional<std::vector<int>> labels;
  const fs::path lf = dir / "labels.csv";
  if (fs::exists(lf)) {
    std::vector<int> values;
    for (const auto& row : csv::read_rows(lf)) {
      const double value = csv::parse_double(row.front());
      if (value != std::floor(value)) throw Error(ErrorKind::kParse, "labels.csv: non-integer label");
      values.push_back(static_cast<int>(value));
    }
    labels = std::move(values);
  }
  return MultiViewDataset(std::move(views), std::move(masks), std::move(labels), std::move(names));
}

void save_dataset(const MultiViewDataset& data, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string());
  nlohmann::ordered_json meta;
  meta["views"] = data.num_views();
  meta["names"] = data.names();
  meta["n"] = data.num_samples();
  csv::write_text(dir / "meta.json", meta.dump(2) + "\n");
  for (std::size_t v = 0; v < data.num_views(); ++v) {
    csv::write_matrix(view_file(dir, "view", v), data.view(v));
    csv::write_matrix(view_file(dir, "mask", v), data.mask(v).cast<double>());
  }
  if (data.labels()) {
    std::string text;
    for (int label : *data.labels()) text += std::to_string(label) + "\n";
    csv::write_text(dir / "labels.csv", text);
  }
}

MultiViewDataset normalize_views(const MultiViewDataset& data) {
  std::vector<Matrix> views = data.views();
  for (std::size_t v = 0; v < views.size(); ++v) {
    Matrix& x = views[v];
    const Mask& m = data.mask(v);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (m(i, j)) {
          lo = std::min(lo, x(i, j));
          hi = std::max(hi, x(i, j));
        }
      }
      if (lo > hi) {
        throw Error(ErrorKind::kFullyMissing, "feature " + std::to_string(i) + " of view " +
                                                  std::to_string(v + 1) + " is fully missing");
      }
      const double span = hi - lo;
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (!m(i, j)) x(i, j) = 0.0;
        else x(i, j) = span > 0.0 ? (x(i, j) - lo) / span : 0.5;
      }
    }
  }
  return MultiViewDataset(std::move(views), data.masks(), data.labels(), data.names());
}

MultiViewDataset inject_missing(const MultiViewDataset& data, double ratio, std::uint64_t seed,
                                const MissingOptions& options) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "missing ratio must lie in [0, 1)");
  }
  if (!data.is_complete()) {
    throw Error(ErrorKind::kInvalidArgument, "missing entries can only be injected into complete data");
  }
  const std::size_t num_views = data.num_views();
  const Eigen::Index n = data.num_samples();

  // Cell c of view v is (c % d_v, c / d_v), i.e. column-major.
  std::vector<std::size_t> offsets(num_views + 1, 0);
  for (std::size_t v = 0; v < num_views; ++v) {
    offsets[v + 1] = offsets[v] + static_cast<std::size_t>(data.num_features(v) * n);
  }
  const std::size_t total = offsets.back();
  // The small slack keeps e.g. 0.29 * 100 from flooring to 28.
  auto removal_count = [&](std::size_t cells) {
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(cells) + 1e-9));
  };

  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    std::vector<Mask> masks = data.masks();
    auto remove_from = [&](std::size_t begin, std::size_t end, std::size_t count) {
      std::vector<std::size_t> cells(end - begin);
      std::iota(cells.begin(), cells.end(), begin);
      // Partial Fisher-Yates: the first `count` slots form a uniform sample.
      for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, cells.size() - 1);
        std::swap(cells[i], cells[pick(rng)]);
        const std::size_t cell = cells[i];
        const auto v = static_cast<std::size_t>(
            std::upper_bound(offsets.begin(), offsets.end(), cell) - offsets.begin() - 1);
        const std::size_t local = cell - offsets[v];
        const auto d = static_cast<std::size_t>(data.num_features(v));
        masks[v](static_cast<Eigen::Index>(local % d), static_cast<Eigen::Index>(local / d)) = 0;
      }
    };
    if (options.per_view) {
      for (std::size_t v = 0; v < num_views; ++v) {
        remove_from(offsets[v], offsets[v + 1], removal_count(offsets[v + 1] - offsets[v]));
      }
    } else {
      remove_from(0, total, removal_count(total));
    }

    bool every_sample_observed = true;
    for (Eigen::Index j = 0; j < n && every_sample_observed; ++j) {
      bool observed = false;
      for (const auto& m : masks) observed = observed || (m.col(j).array() != 0).any();
      every_sample_observed = observed;
    }
    if (every_sample_observed) {
      std::vector<Matrix> views = data.views();
      for (std::size_t v = 0; v < num_views; ++v) {
        views[v] = (masks[v].array() == 0).select(0.0, views[v]);
      }
      return MultiViewDataset(std::move(views), std::move(masks), data.labels(), data.names());
    }
  }
  throw Error(ErrorKind::kFullyMissing,
              "missing ratio leaves a fully missing sample after " +
                  std::to_string(options.max_attempts) + " attempts");
}

MultiViewDataset mean_impute(const MultiViewDataset& data) {
  std::vector<Matrix> views = data.views();
  for (std::size_t v = 0; v < views.size(); ++v) {
    Matrix& x = views[v];
    const Mask& m = data.mask(v);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double sum = 0.0;
      Eigen::Index count = 0;
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (m(i, j)) {
          sum += x(i, j);
          ++count;
        }
      }
      if (count == 0) {
        throw Error(ErrorKind::kFullyMissing, "feature " + std::to_string(i) + " of view " +
                                                  std::to_string(v + 1) + " is fully missing");
      }
      if (count == x.cols()) continue;
      const double mean = sum / static_cast<double>(count);
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (!m(i, j)) x(i, j) = mean;
      }
    }
  }
  return MultiViewDataset(std::move(views), data.masks(), data.labels(), data.names());
}

SyntheticData synth_generate(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const Eigen::Index n = spec.samples;
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    labels[static_cast<std::size_t>(j)] = static_cast<int>(j * spec.classes / n);
  }
  std::shuffle(labels.begin(), labels.end(), rng);

  SyntheticData out;
  std::vector<Matrix> views;
  for (std::size_t v = 0; v < spec.features_per_view.size(); ++v) {
    const Eigen::Index d = spec.features_per_view[v];
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(d));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(static_cast<std::size_t>(spec.informative_per_view));
    std::sort(rows.begin(), rows.end());

    Matrix x(d, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) x(i, j) = unit(rng);
    }
    for (Eigen::Index row : rows) {
      Vector prototype(spec.classes);
      for (int c = 0; c < spec.classes; ++c) prototype(c) = unit(rng);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double value = prototype(labels[static_cast<std::size_t>(j)]) + spec.noise * gauss(rng);
        x(row, j) = std::max(0.0, value);
      }
      out.informative.push_back(FeatureId{v, row});
    }
    views.push_back(std::move(x));
  }
  out.dataset = MultiViewDataset(std::move(views), {}, std::move(labels));
  return out;
}

Matrix stack_views(const std::vector<Matrix>& views) {
  Eigen::Index rows = 0;
  for (const auto& x : views) rows += x.rows();
  Matrix out(rows, views.empty() ? 0 : views.front().cols());
  Eigen::Index offset = 0;
  for (const auto& x : views) {
    out.middleRows(offset, x.rows()) = x;
    offset += x.rows();
  }
  return out;
}

}  // namespace trustfs
