#include "causeway/data_model.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "causeway/error.h"

namespace causeway {
namespace {

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_real(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](char c) { return c == ' ' || c == '\t'; });
}

// Reads one RFC-4180 record. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  ++line;
  for (;;) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw ParseError("line " + std::to_string(line) + ": unterminated quote");
      fields.push_back(std::move(field));
      return true;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (ch == '\r') {
      if (in.peek() == '\n') in.get();
      fields.push_back(std::move(field));
      return true;
    } else if (ch == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
      field_started = true;
    }
  }
}

void write_field(std::ostream& out, const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) {
    out << text;
    return;
  }
  out << '"';
  for (char c : text) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

VariableKind parse_kind(const std::string& text) {
  if (text == "categorical") return VariableKind::kCategorical;
  if (text == "continuous") return VariableKind::kContinuous;
  throw ParseError("unknown variable kind '" + text + "'");
}

VariableRole parse_role(const std::string& text) {
  if (text == "treatment") return VariableRole::kTreatment;
  if (text == "outcome") return VariableRole::kOutcome;
  if (text == "covariate") return VariableRole::kCovariate;
  throw ParseError("unknown variable role '" + text + "'");
}

}  // namespace

std::string_view to_string(VariableKind kind) {
  return kind == VariableKind::kCategorical ? "categorical" : "continuous";
}

std::string_view to_string(VariableRole role) {
  switch (role) {
    case VariableRole::kTreatment:
      return "treatment";
    case VariableRole::kOutcome:
      return "outcome";
    case VariableRole::kCovariate:
      return "covariate";
  }
  return "covariate";
}

void VariableSpec::validate() const {
  if (name.empty()) throw Error("variable with empty name");
  if (kind == VariableKind::kCategorical) {
    if (levels.size() < 2) throw Error("categorical variable '" + name + "' needs >= 2 levels");
    std::set<std::string> seen(levels.begin(), levels.end());
    if (seen.size() != levels.size()) {
      throw Error("categorical variable '" + name + "' has duplicate levels");
    }
    if (!cut_points.empty()) throw Error("categorical variable '" + name + "' has cut points");
    return;
  }
  if (!levels.empty()) throw Error("continuous variable '" + name + "' declares levels");
  for (std::size_t i = 1; i < cut_points.size(); ++i) {
    if (!(cut_points[i - 1] < cut_points[i])) {
      throw Error("cut points of '" + name + "' are not strictly ascending");
    }
  }
  if (!cut_points.empty() || !cut_labels.empty()) {
    if (cut_labels.size() != cut_points.size() + 1) {
      throw Error("variable '" + name + "' needs exactly cuts + 1 labels");
    }
    std::set<std::string> seen(cut_labels.begin(), cut_labels.end());
    if (seen.size() != cut_labels.size()) throw Error("variable '" + name + "' has duplicate labels");
  }
  if (lower_bound && !cut_points.empty() && !(*lower_bound < cut_points.front())) {
    throw Error("lower bound of '" + name + "' is not below its first cut point");
  }
}

std::optional<int> VariableSpec::level_index(std::string_view label) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == label) return static_cast<int>(i);
  }
  return std::nullopt;
}

Schema::Schema(std::vector<VariableSpec> variables) : variables_(std::move(variables)) {
  std::set<std::string> names;
  int treatments = 0;
  int outcomes = 0;
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    const auto& v = variables_[i];
    v.validate();
    if (!names.insert(v.name).second) throw Error("duplicate variable '" + v.name + "'");
    if (v.role == VariableRole::kTreatment) {
      ++treatments;
      treatment_ = i;
    } else if (v.role == VariableRole::kOutcome) {
      ++outcomes;
      outcome_ = i;
    }
  }
  if (treatments != 1) throw Error("schema must have exactly one treatment variable");
  if (outcomes != 1) throw Error("schema must have exactly one outcome variable");
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  auto idx = find(name);
  if (!idx) throw Error("unknown variable '" + std::string(name) + "'");
  return *idx;
}

std::vector<std::string> Schema::covariate_names() const {
  std::vector<std::string> out;
  for (const auto& v : variables_) {
    if (v.role == VariableRole::kCovariate) out.push_back(v.name);
  }
  return out;
}

nlohmann::json Schema::to_json() const {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : variables_) {
    nlohmann::json entry{{"name", v.name},
                         {"kind", std::string(to_string(v.kind))},
                         {"role", std::string(to_string(v.role))}};
    if (v.kind == VariableKind::kCategorical) {
      entry["levels"] = v.levels;
    } else if (!v.cut_labels.empty()) {
      entry["cuts"] = v.cut_points;
      entry["labels"] = v.cut_labels;
      if (v.lower_bound) entry["lower"] = *v.lower_bound;
    }
    vars.push_back(std::move(entry));
  }
  return nlohmann::json{{"variables", std::move(vars)}};
}

Schema Schema::from_json(const nlohmann::json& doc) {
  const nlohmann::json& vars = doc.is_array() ? doc : doc.at("variables");
  if (!vars.is_array()) throw ParseError("schema manifest: expected an array of variables");
  std::vector<VariableSpec> specs;
  try {
    for (const auto& entry : vars) {
      VariableSpec spec;
      spec.name = entry.at("name").get<std::string>();
      spec.kind = parse_kind(entry.at("kind").get<std::string>());
      spec.role = parse_role(entry.value("role", std::string("covariate")));
      if (entry.contains("levels")) {
        spec.levels = entry.at("levels").get<std::vector<std::string>>();
      }
      if (entry.contains("cuts")) {
        spec.cut_points = entry.at("cuts").get<std::vector<double>>();
        spec.cut_labels = entry.at("labels").get<std::vector<std::string>>();
      }
      if (entry.contains("lower")) spec.lower_bound = entry.at("lower").get<double>();
      specs.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schema manifest: ") + e.what());
  }
  return Schema(std::move(specs));
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("schema '" + path.string() + "': " + e.what());
  }
  return from_json(doc);
}

void Schema::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write schema '" + path.string() + "'");
  out << to_json().dump(2) << '\n';
}

Dataset::Dataset(Schema schema, std::vector<std::vector<double>> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  if (columns_.size() != schema_.size()) throw Error("dataset: column count differs from schema");
  num_rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t v = 0; v < columns_.size(); ++v) {
    if (columns_[v].size() != num_rows_) throw Error("dataset: ragged columns");
    const auto& spec = schema_[v];
    for (double x : columns_[v]) {
      if (!std::isfinite(x)) throw Error("dataset: non-finite value in '" + spec.name + "'");
      if (spec.kind == VariableKind::kCategorical &&
          (x != std::floor(x) || x < 0 || x >= spec.num_levels())) {
        throw Error("dataset: value outside declared levels of '" + spec.name + "'");
      }
    }
  }
}

std::string Dataset::cell_text(std::size_t row, std::size_t var) const {
  const auto& spec = schema_[var];
  if (spec.kind == VariableKind::kCategorical) return spec.levels[code(row, var)];
  return format_real(columns_[var][row]);
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> cols(columns_.size());
  for (std::size_t v = 0; v < columns_.size(); ++v) {
    cols[v].reserve(rows.size());
    for (std::size_t r : rows) {
      if (r >= num_rows_) throw Error("select_rows: row index out of range");
      cols[v].push_back(columns_[v][r]);
    }
  }
  Dataset out;
  out.schema_ = schema_;
  out.columns_ = std::move(cols);
  out.num_rows_ = rows.size();
  return out;
}

LoadResult read_csv(std::istream& in, const Schema& schema) {
  std::vector<std::string> fields;
  std::size_t line = 0;
  if (!read_record(in, fields, line)) throw ParseError("csv: missing header row");
  if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF")) fields[0].erase(0, 3);

  // column_of[v] = CSV column holding schema variable v
  std::vector<std::size_t> column_of(schema.size(), SIZE_MAX);
  for (std::size_t c = 0; c < fields.size(); ++c) {
    auto idx = schema.find(fields[c]);
    if (!idx) throw ParseError("csv: unknown column '" + fields[c] + "'");
    if (column_of[*idx] != SIZE_MAX) throw ParseError("csv: duplicate column '" + fields[c] + "'");
    column_of[*idx] = c;
  }
  for (std::size_t v = 0; v < schema.size(); ++v) {
    if (column_of[v] == SIZE_MAX) {
      throw ParseError("csv: missing column '" + schema[v].name + "'");
    }
  }

  std::vector<std::vector<double>> columns(schema.size());
  std::size_t dropped = 0;
  const std::size_t width = fields.size();
  while (read_record(in, fields, line)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != width) {
      throw ParseError("csv line " + std::to_string(line) + ": expected " +
                       std::to_string(width) + " fields, got " + std::to_string(fields.size()));
    }
    bool missing = false;
    for (std::size_t v = 0; v < schema.size() && !missing; ++v) {
      missing = is_blank(fields[column_of[v]]);
    }
    if (missing) {
      ++dropped;
      continue;
    }
    for (std::size_t v = 0; v < schema.size(); ++v) {
      const auto& spec = schema[v];
      const std::string& cell = fields[column_of[v]];
      if (spec.kind == VariableKind::kCategorical) {
        auto level = spec.level_index(cell);
        if (!level) {
          throw ParseError("csv line " + std::to_string(line) + ": value '" + cell +
                           "' is not a declared level of '" + spec.name + "'");
        }
        columns[v].push_back(*level);
      } else {
        auto x = parse_real(cell);
        if (!x) {
          throw ParseError("csv line " + std::to_string(line) + ": cannot parse '" + cell +
                           "' as a number for '" + spec.name + "'");
        }
        columns[v].push_back(*x);
      }
    }
  }
  return LoadResult{Dataset(schema, std::move(columns)), dropped};
}

LoadResult load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open data file '" + path.string() + "'");
  return read_csv(in, schema);
}

void write_csv(const Dataset& data, std::ostream& out) {
  const auto& schema = data.schema();
  for (std::size_t v = 0; v < schema.size(); ++v) {
    if (v) out << ',';
    write_field(out, schema[v].name);
  }
  out << '\n';
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    for (std::size_t v = 0; v < schema.size(); ++v) {
      if (v) out << ',';
      write_field(out, data.cell_text(r, v));
    }
    out << '\n';
  }
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write data file '" + path.string() + "'");
  write_csv(data, out);
}

std::size_t bin_index(double value, std::span<const double> cut_points) {
  auto it = std::lower_bound(cut_points.begin(), cut_points.end(), value);
  return static_cast<std::size_t>(it - cut_points.begin());
}

Dataset discretize(const Dataset& data, std::string_view var, std::span<const double> cut_points,
                   std::span<const std::string> labels, std::optional<double> lower_bound) {
  const std::size_t idx = data.schema().index_of(var);
  const auto& old_spec = data.schema()[idx];
  if (old_spec.kind != VariableKind::kContinuous) {
    throw Error("discretize: '" + old_spec.name + "' is not continuous");
  }
  VariableSpec check = old_spec;
  check.cut_points.assign(cut_points.begin(), cut_points.end());
  check.cut_labels.assign(labels.begin(), labels.end());
  check.lower_bound = lower_bound;
  check.validate();
  if (labels.size() != cut_points.size() + 1 || cut_points.empty()) {
    throw Error("discretize: need at least one cut point and cuts + 1 labels");
  }

  std::vector<double> codes;
  codes.reserve(data.num_rows());
  for (double v : data.column(idx)) {
    if (lower_bound && v <= *lower_bound) {
      throw Error("discretize: value " + format_real(v) + " of '" + old_spec.name +
                  "' is at or below the lower bound " + format_real(*lower_bound));
    }
    codes.push_back(static_cast<double>(bin_index(v, cut_points)));
  }

  std::vector<VariableSpec> specs = data.schema().variables();
  VariableSpec& spec = specs[idx];
  spec.kind = VariableKind::kCategorical;
  spec.levels.assign(labels.begin(), labels.end());
  spec.cut_points.clear();
  spec.cut_labels.clear();
  spec.lower_bound.reset();

  std::vector<std::vector<double>> columns;
  columns.reserve(data.num_variables());
  for (std::size_t v = 0; v < data.num_variables(); ++v) {
    if (v == idx) {
      columns.push_back(std::move(codes));
    } else {
      auto col = data.column(v);
      columns.emplace_back(col.begin(), col.end());
    }
  }
  return Dataset(Schema(std::move(specs)), std::move(columns));
}

Dataset discretize_all(const Dataset& data) {
  Dataset out = data;
  for (const auto& spec : data.schema().variables()) {
    if (spec.kind == VariableKind::kContinuous && !spec.cut_points.empty()) {
      out = discretize(out, spec.name, spec.cut_points, spec.cut_labels, spec.lower_bound);
    }
  }
  return out;
}

std::size_t TreatmentPair::num_treated() const {
  return static_cast<std::size_t>(std::count(indicator.begin(), indicator.end(), 1));
}

TreatmentPair TreatmentPair::subset(std::span<const std::size_t> rows) const {
  TreatmentPair out;
  out.treated_level = treated_level;
  out.control_level = control_level;
  out.data = data.select_rows(rows);
  out.indicator.reserve(rows.size());
  out.source_rows.reserve(rows.size());
  for (std::size_t r : rows) {
    out.indicator.push_back(indicator[r]);
    out.source_rows.push_back(source_rows[r]);
  }
  return out;
}

TreatmentPair split_treatment_pair(const Dataset& data, std::string_view treated,
                                   std::string_view control) {
  if (treated == control) throw Error("treatment pair needs two distinct levels");
  const std::size_t t = data.schema().treatment_index();
  const auto& spec = data.schema()[t];
  if (spec.kind != VariableKind::kCategorical) {
    throw Error("treatment '" + spec.name + "' must be categorical (discretize it first)");
  }
  auto treated_code = spec.level_index(treated);
  auto control_code = spec.level_index(control);
  if (!treated_code) throw Error("treatment level '" + std::string(treated) + "' is not declared");
  if (!control_code) throw Error("treatment level '" + std::string(control) + "' is not declared");

  TreatmentPair pair;
  pair.treated_level = std::string(treated);
  pair.control_level = std::string(control);
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    const int c = data.code(r, t);
    if (c == *treated_code || c == *control_code) {
      pair.source_rows.push_back(r);
      pair.indicator.push_back(c == *treated_code ? 1 : 0);
    }
  }
  const std::size_t n_treated = pair.num_treated();
  if (n_treated == 0) throw Error("treatment level '" + pair.treated_level + "' has no rows");
  if (n_treated == pair.indicator.size()) {
    throw Error("treatment level '" + pair.control_level + "' has no rows");
  }
  pair.data = data.select_rows(pair.source_rows);
  return pair;
}

}  // namespace causeway
