#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairpca/linalg.hpp"
#include "fairpca/types.hpp"

namespace fairpca {

enum class ColumnKind { kNumeric, kCategorical, kSensitive, kLabel };

inline ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "numeric") return ColumnKind::kNumeric;
  if (s == "categorical") return ColumnKind::kCategorical;
  if (s == "sensitive") return ColumnKind::kSensitive;
  if (s == "label") return ColumnKind::kLabel;
  throw load_error("schema: unknown column kind '" + s + "'");
}

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  // Values dropped (with a count) when this column is the designated
  // sensitive feature; ignored when it serves as a plain feature.
  std::vector<std::string> exclude_as_sensitive;
};

// Declarative description of a CSV: column kinds, the sensitive column,
// and the label column with its positive class value.
struct DatasetSchema {
  std::vector<ColumnSpec> columns;
  std::string positive_label;
  std::vector<std::string> missing_values{"?"};

  static DatasetSchema from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw load_error("schema: cannot open '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw load_error("schema: invalid JSON in '" + path + "': " + e.what());
    }
    DatasetSchema schema;
    if (!j.contains("columns") || !j["columns"].is_array()) {
      throw load_error("schema: missing 'columns' array");
    }
    for (const auto& jc : j["columns"]) {
      ColumnSpec spec;
      spec.name = jc.at("name").get<std::string>();
      spec.kind = column_kind_from_string(jc.at("kind").get<std::string>());
      if (jc.contains("exclude_as_sensitive")) {
        spec.exclude_as_sensitive =
            jc["exclude_as_sensitive"].get<std::vector<std::string>>();
      }
      schema.columns.push_back(std::move(spec));
    }
    if (j.contains("positive_label")) {
      schema.positive_label = j["positive_label"].get<std::string>();
    }
    if (j.contains("missing_values")) {
      schema.missing_values = j["missing_values"].get<std::vector<std::string>>();
    }
    schema.validate();
    return schema;
  }

  void validate() const {
    int sensitive = 0, label = 0;
    std::set<std::string> seen;
    for (const ColumnSpec& c : columns) {
      if (!seen.insert(c.name).second) {
        throw load_error("schema: duplicated column '" + c.name + "'");
      }
      if (c.kind == ColumnKind::kSensitive) ++sensitive;
      if (c.kind == ColumnKind::kLabel) ++label;
    }
    if (sensitive != 1) {
      throw load_error("schema: exactly one sensitive column required");
    }
    if (label > 1) throw load_error("schema: at most one label column");
  }

  // Re-designates the sensitive column; the previous one becomes a plain
  // categorical feature.
  void set_sensitive(const std::string& name) {
    ColumnSpec* target = nullptr;
    for (ColumnSpec& c : columns) {
      if (c.name == name) target = &c;
    }
    if (target == nullptr) {
      throw load_error("schema: no column named '" + name + "'");
    }
    if (target->kind == ColumnKind::kLabel) {
      throw load_error("schema: label column cannot be sensitive");
    }
    if (target->kind == ColumnKind::kNumeric) {
      throw load_error("schema: numeric column '" + name +
                       "' cannot be sensitive");
    }
    for (ColumnSpec& c : columns) {
      if (c.kind == ColumnKind::kSensitive) c.kind = ColumnKind::kCategorical;
    }
    target->kind = ColumnKind::kSensitive;
  }

  const ColumnSpec& sensitive_column() const {
    for (const ColumnSpec& c : columns) {
      if (c.kind == ColumnKind::kSensitive) return c;
    }
    throw load_error("schema: no sensitive column");
  }

  const ColumnSpec* label_column() const {
    for (const ColumnSpec& c : columns) {
      if (c.kind == ColumnKind::kLabel) return &c;
    }
    return nullptr;
  }
};

struct RawColumn {
  ColumnSpec spec;
  Vector numeric;                  // filled for numeric columns
  std::vector<std::string> text;   // filled for the others
};

struct RawTable {
  std::vector<RawColumn> columns;
  std::string positive_label;
  std::size_t total_rows = 0;        // parsed data rows before filtering
  std::size_t row_count = 0;         // rows kept
  std::size_t dropped_missing = 0;   // rows dropped for missing tokens
  std::size_t dropped_excluded = 0;  // rows dropped by sensitive exclusion
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

inline double parse_numeric_cell(const std::string& value, std::size_t row,
                                 const std::string& column) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const double parsed = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || value.empty()) {
    throw load_error("row " + std::to_string(row) + ", column '" + column +
                     "': cannot parse '" + value + "' as numeric");
  }
  return parsed;
}

}  // namespace detail

// Loads a comma-separated file with a header row into typed columns.
// Rows with a missing-value token in any schema column are dropped and
// counted; rows whose sensitive value is excluded by the schema are
// dropped and counted separately.
inline RawTable load_csv(const std::string& path, const DatasetSchema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw load_error("load_csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw load_error("load_csv: empty file");
  const std::vector<std::string> header = detail::split_csv_line(line);

  std::vector<std::size_t> file_index;
  for (const ColumnSpec& spec : schema.columns) {
    const auto it = std::find(header.begin(), header.end(), spec.name);
    if (it == header.end()) {
      throw load_error("load_csv: header is missing column '" + spec.name + "'");
    }
    file_index.push_back(static_cast<std::size_t>(it - header.begin()));
  }

  const ColumnSpec& sensitive = schema.sensitive_column();
  std::size_t sensitive_pos = 0;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (schema.columns[c].name == sensitive.name) sensitive_pos = c;
  }

  std::vector<std::vector<std::string>> kept(schema.columns.size());
  RawTable table;
  table.positive_label = schema.positive_label;
  std::size_t row = 1;  // data rows, 1-based for messages
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw load_error("load_csv: row " + std::to_string(row) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
    }
    ++table.total_rows;
    bool missing = false;
    for (std::size_t c = 0; c < schema.columns.size() && !missing; ++c) {
      const std::string& value = cells[file_index[c]];
      for (const std::string& token : schema.missing_values) {
        if (value == token) {
          missing = true;
          break;
        }
      }
    }
    if (missing) {
      ++table.dropped_missing;
      ++row;
      continue;
    }
    const std::string& sensitive_value = cells[file_index[sensitive_pos]];
    if (std::find(sensitive.exclude_as_sensitive.begin(),
                  sensitive.exclude_as_sensitive.end(),
                  sensitive_value) != sensitive.exclude_as_sensitive.end()) {
      ++table.dropped_excluded;
      ++row;
      continue;
    }
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      kept[c].push_back(cells[file_index[c]]);
    }
    ++row;
  }

  table.row_count = kept.empty() ? 0 : kept[0].size();
  if (table.row_count == 0) throw load_error("load_csv: no usable rows");

  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    RawColumn column;
    column.spec = schema.columns[c];
    if (column.spec.kind == ColumnKind::kNumeric) {
      column.numeric.resize(static_cast<Eigen::Index>(table.row_count));
      for (std::size_t r = 0; r < table.row_count; ++r) {
        column.numeric[static_cast<Eigen::Index>(r)] =
            detail::parse_numeric_cell(kept[c][r], r + 1, column.spec.name);
      }
    } else {
      column.text = std::move(kept[c]);
    }
    table.columns.push_back(std::move(column));
  }
  return table;
}

// Record of how one source column maps into the feature matrix.
struct EncodedColumn {
  std::string name;
  bool categorical = false;
  Eigen::Index offset = 0;                // first feature index
  Eigen::Index width = 1;                 // one-hot width (1 for numeric)
  std::vector<std::string> categories;    // sorted, categorical only
  double mean = 0.0, stddev = 1.0;        // numeric only
};

struct Encoding {
  std::vector<EncodedColumn> columns;
  std::vector<std::string> feature_names;
};

struct PreprocessOptions {
  bool include_sensitive = true;  // keep the sensitive column as a feature
  bool standardize = true;        // z-score numeric columns
};

// Standardized, encoded samples with the sensitive-group partition.
struct GroupedDataset {
  Matrix matrix;                         // n x d
  std::vector<int> group_ids;            // per-row group in [0, k)
  std::vector<std::string> group_names;  // k names
  std::optional<std::vector<int>> labels;  // +-1 per row
  Encoding encoding;
  std::vector<std::string> warnings;
  std::size_t dropped_missing = 0;
  std::size_t dropped_excluded = 0;

  Eigen::Index n() const { return matrix.rows(); }
  Eigen::Index dim() const { return matrix.cols(); }
  int group_count() const { return static_cast<int>(group_names.size()); }
};

// Encodes a loaded table: label removed from features, categoricals
// one-hot encoded (sorted category order), numerics z-scored over the
// full dataset, sensitive column retained among the features (flag to
// exclude) and used for the group partition.
inline GroupedDataset preprocess(const RawTable& table,
                                 const PreprocessOptions& opts = {}) {
  const Eigen::Index n = static_cast<Eigen::Index>(table.row_count);
  GroupedDataset out;
  out.dropped_missing = table.dropped_missing;
  out.dropped_excluded = table.dropped_excluded;

  const RawColumn* sensitive = nullptr;
  const RawColumn* label = nullptr;
  std::vector<const RawColumn*> features;
  for (const RawColumn& c : table.columns) {
    switch (c.spec.kind) {
      case ColumnKind::kLabel:
        label = &c;
        break;
      case ColumnKind::kSensitive:
        sensitive = &c;
        if (opts.include_sensitive) features.push_back(&c);
        break;
      default:
        features.push_back(&c);
        break;
    }
  }
  if (sensitive == nullptr) throw load_error("preprocess: no sensitive column");

  // Feature layout pass.
  Eigen::Index width = 0;
  for (const RawColumn* c : features) {
    EncodedColumn enc;
    enc.name = c->spec.name;
    enc.offset = width;
    if (c->spec.kind == ColumnKind::kNumeric) {
      const double mean = c->numeric.mean();
      const double var = (c->numeric.array() - mean).square().mean();
      if (var <= 0.0) {
        out.warnings.push_back("dropped constant numeric column '" +
                               c->spec.name + "'");
        continue;
      }
      enc.mean = mean;
      enc.stddev = std::sqrt(var);
      enc.width = 1;
      out.encoding.feature_names.push_back(c->spec.name);
      width += 1;
    } else {
      std::set<std::string> values(c->text.begin(), c->text.end());
      enc.categorical = true;
      enc.categories.assign(values.begin(), values.end());
      enc.width = static_cast<Eigen::Index>(enc.categories.size());
      for (const std::string& v : enc.categories) {
        out.encoding.feature_names.push_back(c->spec.name + "=" + v);
      }
      width += enc.width;
    }
    out.encoding.columns.push_back(std::move(enc));
  }

  out.matrix = Matrix::Zero(n, width);
  for (const EncodedColumn& enc : out.encoding.columns) {
    const RawColumn* c = nullptr;
    for (const RawColumn* f : features) {
      if (f->spec.name == enc.name) c = f;
    }
    if (enc.categorical) {
      std::map<std::string, Eigen::Index> index;
      for (std::size_t i = 0; i < enc.categories.size(); ++i) {
        index[enc.categories[i]] = static_cast<Eigen::Index>(i);
      }
      for (Eigen::Index r = 0; r < n; ++r) {
        out.matrix(r, enc.offset + index.at(c->text[static_cast<size_t>(r)])) = 1.0;
      }
    } else if (opts.standardize) {
      out.matrix.col(enc.offset) = (c->numeric.array() - enc.mean) / enc.stddev;
    } else {
      out.matrix.col(enc.offset) = c->numeric;
    }
  }

  // Group partition from the sensitive column.
  {
    std::set<std::string> values(sensitive->text.begin(), sensitive->text.end());
    out.group_names.assign(values.begin(), values.end());
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < out.group_names.size(); ++i) {
      index[out.group_names[i]] = static_cast<int>(i);
    }
    out.group_ids.resize(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
      out.group_ids[static_cast<std::size_t>(r)] =
          index.at(sensitive->text[static_cast<size_t>(r)]);
    }
  }

  if (label != nullptr) {
    std::vector<int> y(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
      y[static_cast<std::size_t>(r)] =
          label->text[static_cast<size_t>(r)] == table.positive_label ? 1 : -1;
    }
    out.labels = std::move(y);
  }
  return out;
}

// Decodes the one-hot block of a categorical source column back to its
// category values (round-trip check for the encoding).
inline std::vector<std::string> decode_categorical(const GroupedDataset& gd,
                                                   const std::string& column) {
  for (const EncodedColumn& enc : gd.encoding.columns) {
    if (enc.name != column) continue;
    if (!enc.categorical) {
      throw invalid_input_error("decode_categorical: '" + column +
                                "' is numeric");
    }
    std::vector<std::string> values;
    values.reserve(static_cast<std::size_t>(gd.n()));
    for (Eigen::Index r = 0; r < gd.n(); ++r) {
      Eigen::Index best = 0;
      gd.matrix.row(r).segment(enc.offset, enc.width).maxCoeff(&best);
      values.push_back(enc.categories[static_cast<std::size_t>(best)]);
    }
    return values;
  }
  throw invalid_input_error("decode_categorical: no encoded column '" +
                            column + "'");
}

// Row partition by group id, in stable row order.
inline std::vector<Matrix> split_groups(const GroupedDataset& gd) {
  const int k = gd.group_count();
  std::vector<std::vector<Eigen::Index>> rows(static_cast<std::size_t>(k));
  for (Eigen::Index r = 0; r < gd.n(); ++r) {
    rows[static_cast<std::size_t>(gd.group_ids[static_cast<std::size_t>(r)])]
        .push_back(r);
  }
  std::vector<Matrix> blocks;
  for (int g = 0; g < k; ++g) {
    const auto& idx = rows[static_cast<std::size_t>(g)];
    Matrix block(static_cast<Eigen::Index>(idx.size()), gd.dim());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      block.row(static_cast<Eigen::Index>(i)) = gd.matrix.row(idx[i]);
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

namespace detail {

// Deterministic Fisher-Yates; std::shuffle is implementation-defined.
inline void shuffle_indices(std::vector<Eigen::Index>& idx,
                            std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

inline GroupedDataset take_rows(const GroupedDataset& gd,
                                const std::vector<Eigen::Index>& rows) {
  GroupedDataset out;
  out.matrix.resize(static_cast<Eigen::Index>(rows.size()), gd.dim());
  out.group_ids.reserve(rows.size());
  if (gd.labels) out.labels.emplace();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.matrix.row(static_cast<Eigen::Index>(i)) = gd.matrix.row(rows[i]);
    out.group_ids.push_back(gd.group_ids[static_cast<std::size_t>(rows[i])]);
    if (gd.labels) {
      out.labels->push_back((*gd.labels)[static_cast<std::size_t>(rows[i])]);
    }
  }
  out.group_names = gd.group_names;
  out.encoding = gd.encoding;
  return out;
}

}  // namespace detail

// Deterministic split stratified by (group, label); strata of size one go
// to the train side with a warning.
inline std::pair<GroupedDataset, GroupedDataset> train_test_split(
    const GroupedDataset& gd, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw invalid_input_error("train_test_split: need 0 < fraction < 1");
  }
  // Strata in fixed (group, label) order for determinism.
  std::map<std::pair<int, int>, std::vector<Eigen::Index>> strata;
  for (Eigen::Index r = 0; r < gd.n(); ++r) {
    const int label = gd.labels ? (*gd.labels)[static_cast<std::size_t>(r)] : 0;
    strata[{gd.group_ids[static_cast<std::size_t>(r)], label}].push_back(r);
  }
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> train_rows, test_rows;
  std::vector<std::string> warnings;
  for (auto& [key, idx] : strata) {
    if (idx.size() == 1) {
      warnings.push_back("stratum (group " + std::to_string(key.first) +
                         ", label " + std::to_string(key.second) +
                         ") has a single sample; assigned to train");
      train_rows.push_back(idx[0]);
      continue;
    }
    detail::shuffle_indices(idx, rng);
    std::size_t n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(idx.size())));
    n_test = std::min(n_test, idx.size() - 1);
    n_test = std::max<std::size_t>(n_test, 1);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      (i < n_test ? test_rows : train_rows).push_back(idx[i]);
    }
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  GroupedDataset train = detail::take_rows(gd, train_rows);
  GroupedDataset test = detail::take_rows(gd, test_rows);
  train.warnings = std::move(warnings);
  return {std::move(train), std::move(test)};
}

// Synthetic two-group fixture: group one is a zero-mean Gaussian
// elongated along the direction at +angle in the first two coordinates;
// group two is its exact reflection across that plane's first axis, so
// the two sample Gram matrices are mirror images and the bisector
// subspace equalizes the disparity errors.
inline GroupedDataset synthetic_mirrored_groups(Eigen::Index n_per_group,
                                                Eigen::Index d, double angle,
                                                std::uint64_t seed) {
  if (d < 2) throw dimension_error("synthetic_mirrored_groups: need d >= 2");
  if (n_per_group < 1) {
    throw invalid_input_error("synthetic_mirrored_groups: need n >= 1");
  }
  detail::GaussianStream gauss(seed);
  Vector scales = Vector::Constant(d, 0.3);
  scales[0] = 3.0;
  scales[1] = 1.0;
  const double c = std::cos(angle), s = std::sin(angle);

  GroupedDataset out;
  out.matrix.resize(2 * n_per_group, d);
  out.group_ids.resize(static_cast<std::size_t>(2 * n_per_group));
  out.group_names = {"group1", "group2"};
  for (Eigen::Index i = 0; i < n_per_group; ++i) {
    Vector z(d);
    for (Eigen::Index j = 0; j < d; ++j) z[j] = gauss.next() * scales[j];
    Vector x = z;
    x[0] = c * z[0] - s * z[1];
    x[1] = s * z[0] + c * z[1];
    out.matrix.row(i) = x.transpose();
    Vector mirrored = x;
    mirrored[1] = -x[1];
    out.matrix.row(n_per_group + i) = mirrored.transpose();
    out.group_ids[static_cast<std::size_t>(i)] = 0;
    out.group_ids[static_cast<std::size_t>(n_per_group + i)] = 1;
  }
  return out;
}

}  // namespace fairpca
