#ifndef DPDT_DATASET_HPP
#define DPDT_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace dpdt {

using ClassIndex = std::size_t;
using FeatureIndex = std::size_t;
using RowIndex = std::uint32_t;

/// Thrown for malformed input data (CSV cells, label columns, schemas).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a split sends every sample of a view to the same side.
class DegenerateSplitError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Axis-aligned test `x[feature] <= threshold`; samples satisfying it go left.
struct Split {
  FeatureIndex feature = 0;
  double threshold = 0.0;

  bool goes_left(double value) const { return value <= threshold; }

  friend bool operator==(const Split&, const Split&) = default;
  friend auto operator<=>(const Split&, const Split&) = default;
};

/// Immutable row-major table of N samples by p real features plus class labels.
class Dataset {
 public:
  Dataset(std::vector<double> features, std::size_t feature_count, std::vector<ClassIndex> labels,
          std::size_t class_count, std::vector<std::string> feature_names = {},
          std::vector<std::string> class_names = {})
      : features_(std::move(features)),
        labels_(std::move(labels)),
        feature_count_(feature_count),
        class_count_(class_count),
        feature_names_(std::move(feature_names)),
        class_names_(std::move(class_names)) {
    if (feature_count_ == 0) throw DataError("dataset needs at least one feature");
    if (labels_.empty()) throw DataError("dataset needs at least one sample");
    if (features_.size() != labels_.size() * feature_count_)
      throw DataError("feature matrix size does not match N x p");
    if (labels_.size() > std::numeric_limits<RowIndex>::max())
      throw DataError("too many rows");
    if (class_count_ == 0) throw DataError("class count must be positive");
    for (ClassIndex y : labels_)
      if (y >= class_count_) throw DataError("label " + std::to_string(y) + " >= class count");
    for (double v : features_)
      if (!std::isfinite(v)) throw DataError("non-finite feature value");
    if (feature_names_.empty()) {
      for (std::size_t j = 0; j < feature_count_; ++j) feature_names_.push_back("f" + std::to_string(j));
    } else if (feature_names_.size() != feature_count_) {
      throw DataError("feature name count does not match p");
    }
    if (class_names_.empty()) {
      for (std::size_t k = 0; k < class_count_; ++k) class_names_.push_back(std::to_string(k));
    } else if (class_names_.size() != class_count_) {
      throw DataError("class name count does not match K");
    }
  }

  std::size_t size() const { return labels_.size(); }
  std::size_t feature_count() const { return feature_count_; }
  std::size_t class_count() const { return class_count_; }

  /// A loaded file with a single class; fitting it yields one leaf.
  bool degenerate() const { return class_count_ < 2; }

  double value(std::size_t row, FeatureIndex feature) const { return features_[row * feature_count_ + feature]; }
  ClassIndex label(std::size_t row) const { return labels_[row]; }

  std::vector<double> row(std::size_t r) const {
    auto first = features_.begin() + static_cast<std::ptrdiff_t>(r * feature_count_);
    return {first, first + static_cast<std::ptrdiff_t>(feature_count_)};
  }

  const std::vector<ClassIndex>& labels() const { return labels_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

  /// CSV text with a header row; labels written as class indices.
  std::string to_csv(const std::string& label_name = "label") const {
    std::ostringstream out;
    out.precision(17);
    for (const auto& name : feature_names_) out << name << ',';
    out << label_name << '\n';
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t j = 0; j < feature_count_; ++j) out << value(i, j) << ',';
      out << labels_[i] << '\n';
    }
    return out.str();
  }

 private:
  std::vector<double> features_;
  std::vector<ClassIndex> labels_;
  std::size_t feature_count_;
  std::size_t class_count_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> class_names_;
};

/// A weighted subset of a dataset's rows. The dataset must outlive the view.
///
/// Weights are indexed by dataset row and shared between a view and the views
/// partitioned from it. Default weights are 1 per row; only ratios of weight
/// mass matter to any consumer, and unit weights keep class masses integral.
class SampleView {
 public:
  explicit SampleView(const Dataset& data)
      : SampleView(data, std::vector<double>(data.size(), 1.0)) {}

  SampleView(const Dataset& data, std::vector<double> weights)
      : data_(&data), weights_(std::make_shared<const std::vector<double>>(std::move(weights))) {
    if (weights_->size() != data.size()) throw std::invalid_argument("weight vector length must equal N");
    for (double w : *weights_)
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("weights must be finite and >= 0");
    indices_.resize(data.size());
    std::iota(indices_.begin(), indices_.end(), RowIndex{0});
    recompute_mass();
  }

  /// View over explicit rows; `rows` must be strictly increasing.
  SampleView(const Dataset& data, std::vector<RowIndex> rows, std::shared_ptr<const std::vector<double>> weights)
      : data_(&data), weights_(std::move(weights)), indices_(std::move(rows)) {
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (indices_[i] >= data.size()) throw std::out_of_range("row index out of range");
      if (i > 0 && indices_[i] <= indices_[i - 1]) throw std::invalid_argument("row indices must be strictly increasing");
    }
    recompute_mass();
  }

  const Dataset& data() const { return *data_; }
  const std::vector<RowIndex>& indices() const { return indices_; }
  const std::shared_ptr<const std::vector<double>>& shared_weights() const { return weights_; }
  double weight(RowIndex row) const { return (*weights_)[row]; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  double mass() const { return mass_; }

  /// Weight mass per class.
  std::vector<double> class_masses() const {
    std::vector<double> masses(data_->class_count(), 0.0);
    for (RowIndex r : indices_) masses[data_->label(r)] += weight(r);
    return masses;
  }

  /// True when at most one class carries samples.
  bool pure() const {
    if (indices_.empty()) return true;
    ClassIndex first = data_->label(indices_.front());
    return std::all_of(indices_.begin(), indices_.end(), [&](RowIndex r) { return data_->label(r) == first; });
  }

 private:
  friend struct ViewAccess;

  SampleView(const Dataset& data, std::shared_ptr<const std::vector<double>> weights, std::vector<RowIndex> rows,
             double mass)
      : data_(&data), weights_(std::move(weights)), indices_(std::move(rows)), mass_(mass) {}

  void recompute_mass() {
    mass_ = 0.0;
    for (RowIndex r : indices_) mass_ += weight(r);
  }

  const Dataset* data_;
  std::shared_ptr<const std::vector<double>> weights_;
  std::vector<RowIndex> indices_;
  double mass_ = 0.0;
};

struct ViewAccess {
  static SampleView make(const SampleView& parent, std::vector<RowIndex> rows, double mass) {
    return SampleView(parent.data(), parent.shared_weights(), std::move(rows), mass);
  }
};

struct Partition {
  SampleView left;
  SampleView right;
  double p_left;
  double p_right() const { return 1.0 - p_left; }
};

/// Splits a view into `<= threshold` and `> threshold` children without
/// checking for empty children.
inline std::pair<SampleView, SampleView> split_view(const SampleView& view, const Split& split) {
  const Dataset& data = view.data();
  std::vector<RowIndex> left, right;
  left.reserve(view.size());
  right.reserve(view.size());
  double left_mass = 0.0, right_mass = 0.0;
  for (RowIndex r : view.indices()) {
    if (split.goes_left(data.value(r, split.feature))) {
      left.push_back(r);
      left_mass += view.weight(r);
    } else {
      right.push_back(r);
      right_mass += view.weight(r);
    }
  }
  return {ViewAccess::make(view, std::move(left), left_mass), ViewAccess::make(view, std::move(right), right_mass)};
}

/// Partition with the transition probability of the left child. Throws
/// DegenerateSplitError if either child is empty.
inline Partition partition(const SampleView& view, const Split& split) {
  if (view.empty()) throw std::invalid_argument("cannot partition an empty view");
  if (split.feature >= view.data().feature_count()) throw std::out_of_range("split feature out of range");
  auto [left, right] = split_view(view, split);
  if (left.empty() || right.empty())
    throw DegenerateSplitError("split on feature " + std::to_string(split.feature) + " leaves a child empty");
  double p_left = view.mass() > 0.0 ? left.mass() / view.mass() : static_cast<double>(left.size()) / view.size();
  return {std::move(left), std::move(right), p_left};
}

// ----------------------------------------------------------------------------
// Synthetic data
// ----------------------------------------------------------------------------

/// SplitMix64; portable so synthetic datasets are identical across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::uint64_t state_;
};

/// Class of (x, y) on a cells x cells checkerboard of the unit square.
inline ClassIndex checkerboard_label(double x, double y, int cells) {
  auto cx = static_cast<long>(std::floor(cells * x));
  auto cy = static_cast<long>(std::floor(cells * y));
  return static_cast<ClassIndex>((cx + cy) % 2);
}

/// n uniform points on [0,1)^2 labeled by a cells x cells checkerboard.
inline Dataset generate_checkerboard(std::size_t n, int cells, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample count must be >= 1");
  if (cells < 1) throw std::invalid_argument("cells must be >= 1");
  SplitMix64 rng(seed);
  std::vector<double> features;
  std::vector<ClassIndex> labels;
  features.reserve(2 * n);
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = rng.uniform();
    double y = rng.uniform();
    features.push_back(x);
    features.push_back(y);
    labels.push_back(checkerboard_label(x, y, cells));
  }
  return Dataset(std::move(features), 2, std::move(labels), 2, {"x", "y"});
}

/// The XOR dataset: label (floor(2x) + floor(2y)) mod 2.
inline Dataset generate_xor(std::size_t n, std::uint64_t seed) { return generate_checkerboard(n, 2, seed); }

// ----------------------------------------------------------------------------
// CSV
// ----------------------------------------------------------------------------

struct CsvOptions {
  char delimiter = ',';
  bool has_header = true;
};

namespace detail {

inline std::vector<std::vector<std::string>> parse_csv_records(std::istream& in, char delim) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  char c;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
    bool blank = record.size() == 1 && record.front().empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == delim) {
      record.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\r') {
      if (in.peek() == '\n') continue;
      end_record();
      ++line;
    } else if (c == '\n') {
      end_record();
      ++line;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field at line " + std::to_string(line));
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

inline std::optional<double> parse_real(const std::string& cell) {
  std::string t = trim(cell);
  if (t.empty()) return std::nullopt;
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (used != t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_integer(const std::string& cell) {
  std::string t = trim(cell);
  if (t.empty()) return std::nullopt;
  std::size_t used = 0;
  long long v;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (used != t.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Label column given by header name or by zero-based index (negative counts from the end).
using LabelColumn = std::variant<std::string, long>;

/// Parses CSV text. Integer labels are mapped to dense indices in ascending
/// order; any non-integer label switches to first-appearance encoding.
inline Dataset parse_csv(std::istream& in, const LabelColumn& label_column, const CsvOptions& options = {}) {
  auto records = detail::parse_csv_records(in, options.delimiter);
  if (records.empty()) throw DataError("empty CSV input");
  std::vector<std::string> header;
  std::size_t first_data = 0;
  if (options.has_header) {
    header = records.front();
    first_data = 1;
    for (auto& h : header) h = detail::trim(h);
  }
  if (records.size() <= first_data) throw DataError("CSV has no data rows");
  const std::size_t width = records[first_data].size();
  if (width < 2) throw DataError("CSV needs at least one feature column and a label column");
  if (options.has_header && header.size() != width)
    throw DataError("header has " + std::to_string(header.size()) + " columns, first row has " + std::to_string(width));

  std::size_t label_idx = 0;
  if (const auto* name = std::get_if<std::string>(&label_column)) {
    auto it = std::find(header.begin(), header.end(), *name);
    if (it != header.end()) {
      if (std::find(it + 1, header.end(), *name) != header.end())
        throw DataError("label column name is ambiguous: '" + *name + "' names more than one column");
      label_idx = static_cast<std::size_t>(it - header.begin());
    } else if (auto as_int = detail::parse_integer(*name)) {
      long i = static_cast<long>(*as_int);
      if (i < 0) i += static_cast<long>(width);
      if (i < 0 || i >= static_cast<long>(width)) throw DataError("label column index out of range: " + *name);
      label_idx = static_cast<std::size_t>(i);
    } else {
      throw DataError("label column not found: " + *name);
    }
  } else {
    long i = std::get<long>(label_column);
    if (i < 0) i += static_cast<long>(width);
    if (i < 0 || i >= static_cast<long>(width)) throw DataError("label column index out of range");
    label_idx = static_cast<std::size_t>(i);
  }

  const std::size_t n = records.size() - first_data;
  const std::size_t p = width - 1;
  std::vector<double> features;
  features.reserve(n * p);
  std::vector<std::string> raw_labels;
  raw_labels.reserve(n);
  for (std::size_t r = first_data; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t line = r + 1;
    if (rec.size() != width)
      throw DataError("row " + std::to_string(line) + " has " + std::to_string(rec.size()) + " columns, expected " +
                      std::to_string(width));
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_idx) {
        raw_labels.push_back(detail::trim(rec[c]));
        continue;
      }
      auto v = detail::parse_real(rec[c]);
      if (!v) {
        std::string col = options.has_header ? header[c] : std::to_string(c);
        throw DataError("cannot parse '" + rec[c] + "' as a finite real at row " + std::to_string(line) +
                        ", column " + col);
      }
      features.push_back(*v);
    }
  }

  std::vector<std::string> class_names;
  std::vector<ClassIndex> labels(n);
  bool all_integer = std::all_of(raw_labels.begin(), raw_labels.end(),
                                 [](const std::string& s) { return detail::parse_integer(s).has_value(); });
  if (all_integer) {
    std::vector<long long> values;
    for (const auto& s : raw_labels) values.push_back(*detail::parse_integer(s));
    std::vector<long long> distinct = values;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (long long v : distinct) class_names.push_back(std::to_string(v));
    for (std::size_t i = 0; i < n; ++i)
      labels[i] = static_cast<ClassIndex>(std::lower_bound(distinct.begin(), distinct.end(), values[i]) - distinct.begin());
  } else {
    std::unordered_map<std::string, ClassIndex> codes;
    for (std::size_t i = 0; i < n; ++i) {
      auto [it, inserted] = codes.try_emplace(raw_labels[i], class_names.size());
      if (inserted) class_names.push_back(raw_labels[i]);
      labels[i] = it->second;
    }
  }

  std::vector<std::string> feature_names;
  for (std::size_t c = 0; c < width; ++c)
    if (c != label_idx) feature_names.push_back(options.has_header ? header[c] : "f" + std::to_string(feature_names.size()));
  const std::size_t k = class_names.size();
  return Dataset(std::move(features), p, std::move(labels), k, std::move(feature_names), std::move(class_names));
}

inline Dataset load_csv(const std::string& path, const LabelColumn& label_column, const CsvOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return parse_csv(in, label_column, options);
}

}  // namespace dpdt

#endif  // DPDT_DATASET_HPP
