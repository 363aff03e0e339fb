#ifndef CAUSEWAY_DATA_MODEL_H_
#define CAUSEWAY_DATA_MODEL_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace causeway {

enum class VariableKind { kContinuous, kCategorical };
enum class VariableRole { kTreatment, kOutcome, kCovariate };

std::string_view to_string(VariableKind kind);
std::string_view to_string(VariableRole role);

// One column of a dataset schema.
//
// A categorical variable carries its ordered level labels. A continuous
// variable may carry the cut points and labels used to discretize it; bins
// are left-open and right-closed, so `v` lands in the first bin j with
// v <= cut_points[j] and in the last bin otherwise. `lower_bound`, when set,
// is the open left edge of the first bin.
struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::kCategorical;
  VariableRole role = VariableRole::kCovariate;
  std::vector<std::string> levels;
  std::vector<double> cut_points;
  std::vector<std::string> cut_labels;
  std::optional<double> lower_bound;

  // Throws causeway::Error when the invariants above are violated.
  void validate() const;
  // Index of `label` in `levels`, or nullopt.
  std::optional<int> level_index(std::string_view label) const;
  int num_levels() const { return static_cast<int>(levels.size()); }
};

// Ordered list of variables with exactly one treatment and one outcome.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<VariableSpec> variables);

  const std::vector<VariableSpec>& variables() const { return variables_; }
  std::size_t size() const { return variables_.size(); }
  const VariableSpec& operator[](std::size_t i) const { return variables_[i]; }

  std::optional<std::size_t> find(std::string_view name) const;
  // Like find() but throws when the variable is absent.
  std::size_t index_of(std::string_view name) const;
  std::size_t treatment_index() const { return treatment_; }
  std::size_t outcome_index() const { return outcome_; }
  // Names of every covariate, in schema order.
  std::vector<std::string> covariate_names() const;

  nlohmann::json to_json() const;
  static Schema from_json(const nlohmann::json& doc);
  static Schema load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<VariableSpec> variables_;
  std::size_t treatment_ = 0;
  std::size_t outcome_ = 0;
};

// Column-oriented table of fully observed records. Categorical cells hold
// level codes; continuous cells hold reals. Immutable once built.
class Dataset {
 public:
  Dataset() = default;
  // `columns[v]` holds one value per row; categorical values are level codes
  // stored as doubles and must be integral and in range.
  Dataset(Schema schema, std::vector<std::vector<double>> columns);

  const Schema& schema() const { return schema_; }
  std::size_t num_rows() const { return num_rows_; }
  std::size_t num_variables() const { return columns_.size(); }

  std::span<const double> column(std::size_t var) const { return columns_[var]; }
  std::span<const double> column(std::string_view name) const {
    return columns_[schema_.index_of(name)];
  }
  double value(std::size_t row, std::size_t var) const { return columns_[var][row]; }
  int code(std::size_t row, std::size_t var) const {
    return static_cast<int>(columns_[var][row]);
  }
  // Text form of a cell: the level label or the shortest round-tripping real.
  std::string cell_text(std::size_t row, std::size_t var) const;

  // Rows in the given order; indices may repeat (bootstrap resampling).
  Dataset select_rows(std::span<const std::size_t> rows) const;

 private:
  Schema schema_;
  std::vector<std::vector<double>> columns_;
  std::size_t num_rows_ = 0;
};

struct LoadResult {
  Dataset dataset;
  std::size_t dropped_rows = 0;
};

// Parses an RFC-4180 CSV whose header names exactly the schema variables in
// any order. Rows with an empty cell are dropped and counted.
LoadResult load_csv(const std::filesystem::path& path, const Schema& schema);
LoadResult read_csv(std::istream& in, const Schema& schema);
void write_csv(const Dataset& data, std::ostream& out);
void write_csv(const Dataset& data, const std::filesystem::path& path);

// Bin index of `value` for ascending `cut_points` (left-open, right-closed).
std::size_t bin_index(double value, std::span<const double> cut_points);

// Replaces continuous variable `var` with a categorical one labelled
// `labels` (cut_points.size() + 1 entries).
Dataset discretize(const Dataset& data, std::string_view var,
                   std::span<const double> cut_points,
                   std::span<const std::string> labels,
                   std::optional<double> lower_bound = std::nullopt);

// Applies the cut points declared in the schema.
Dataset discretize_all(const Dataset& data);

// Rows whose treatment is `treated_level` or `control_level`, with the binary
// indicator t_i = 1 iff the row received `treated_level`.
struct TreatmentPair {
  std::string treated_level;
  std::string control_level;
  Dataset data;
  std::vector<int> indicator;
  // Row index of each retained row in the source dataset.
  std::vector<std::size_t> source_rows;

  std::size_t num_treated() const;
  std::size_t num_control() const { return indicator.size() - num_treated(); }
  // Same pair restricted to (or resampled at) `rows` of `data`.
  TreatmentPair subset(std::span<const std::size_t> rows) const;
};

TreatmentPair split_treatment_pair(const Dataset& data, std::string_view treated,
                                   std::string_view control);

}  // namespace causeway

#endif  // CAUSEWAY_DATA_MODEL_H_
