#include "treatfair/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "treatfair/error.hpp"

namespace treatfair {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::string(trim(cell)));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  out.push_back(std::string(trim(cell)));
  return out;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool parse_number(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc{} && res.ptr == text.data() + text.size() && std::isfinite(out);
}

}  // namespace

bool is_missing(std::string_view cell) {
  static const std::set<std::string, std::less<>> tokens{"", "NA", "N/A", "na", "NaN", "nan", "NAN", "?", "null", "NULL", "None"};
  return tokens.count(trim(cell)) > 0;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

SchemaConfig SchemaConfig::from_json(const nlohmann::json& j) {
  try {
    SchemaConfig c;
    c.sensitive = j.value("sensitive", std::vector<std::string>{});
    c.covariates = j.value("covariates", std::vector<std::string>{});
    c.treatments = j.value("treatments", std::vector<std::string>{});
    c.outcome = j.value("outcome", std::string{});
    c.kinds = j.value("kinds", std::map<std::string, std::string>{});
    c.categorical_codes = j.value("categorical_codes", std::map<std::string, std::vector<std::string>>{});
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::invalid_argument, std::string("malformed schema config: ") + e.what());
  }
}

SchemaConfig SchemaConfig::from_schema(const FeatureSchema& schema) {
  SchemaConfig c;
  for (const auto& col : schema.columns()) {
    switch (col.role) {
      case Role::sensitive:
        c.sensitive.push_back(col.name);
        break;
      case Role::covariate:
        c.covariates.push_back(col.name);
        break;
      case Role::treatment:
        c.treatments.push_back(col.name);
        break;
      case Role::outcome:
        c.outcome = col.name;
        break;
    }
    c.kinds[col.name] = std::string(to_string(col.type.kind));
    if (col.type.kind == Kind::categorical || !col.labels.empty()) {
      std::vector<std::string> labels = col.labels;
      for (int k = static_cast<int>(labels.size()); k < col.type.levels(); ++k) labels.push_back(std::to_string(k));
      c.categorical_codes[col.name] = labels;
    }
  }
  return c;
}

SchemaConfig SchemaConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io_failure, "cannot open schema config " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw error(errc::io_failure, "schema config " + path + " is not valid JSON: " + e.what());
  }
}

nlohmann::json SchemaConfig::to_json() const {
  return {{"sensitive", sensitive},         {"covariates", covariates}, {"treatments", treatments},
          {"outcome", outcome},             {"kinds", kinds},           {"categorical_codes", categorical_codes}};
}

void SchemaConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw error(errc::io_failure, "cannot write " + path);
  out << to_json().dump(2) << '\n';
  if (!out) throw error(errc::io_failure, "failed writing " + path);
}

FeatureSchema SchemaConfig::to_schema() const {
  if (sensitive.empty()) throw error(errc::role_missing, "schema config declares no sensitive column");
  if (treatments.empty()) throw error(errc::role_missing, "schema config declares no treatment column");
  if (outcome.empty()) throw error(errc::role_missing, "schema config declares no outcome");
  std::set<std::string> named;
  for (const auto* v : {&sensitive, &covariates, &treatments}) named.insert(v->begin(), v->end());
  named.insert(outcome);
  for (const auto& [k, _] : kinds)
    if (!named.count(k)) throw error(errc::role_missing, "column '" + k + "' has a kind but no role");
  for (const auto& [k, _] : categorical_codes)
    if (!named.count(k)) throw error(errc::role_missing, "column '" + k + "' has codes but no role");

  std::vector<Column> cols;
  auto add = [&](const std::string& name, Role role) {
    Column c;
    c.name = name;
    c.role = role;
    const auto kit = kinds.find(name);
    const Kind kind = kit != kinds.end() ? kind_from_string(kit->second)
                                         : (role == Role::outcome ? Kind::binary : Kind::continuous);
    const auto cit = categorical_codes.find(name);
    if (cit != categorical_codes.end()) c.labels = cit->second;
    if (kind == Kind::categorical) {
      if (c.labels.empty())
        throw error(errc::invalid_argument, "categorical column '" + name + "' needs categorical_codes");
      c.type = ColumnType::categorical(static_cast<int>(c.labels.size()));
    } else if (kind == Kind::binary) {
      c.type = ColumnType::binary();
    } else {
      c.type = ColumnType::continuous();
      c.labels.clear();
    }
    cols.push_back(std::move(c));
  };
  for (const auto& n : sensitive) add(n, Role::sensitive);
  for (const auto& n : covariates) add(n, Role::covariate);
  for (const auto& n : treatments) add(n, Role::treatment);
  add(outcome, Role::outcome);
  return FeatureSchema(std::move(cols));
}

Dataset read_csv(std::istream& in, const SchemaConfig& config, const std::string& source) {
  FeatureSchema schema = config.to_schema();
  std::string line;
  if (!std::getline(in, line)) throw error(errc::io_failure, source + " has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_line(line);
  std::vector<std::size_t> pos(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto it = std::find(header.begin(), header.end(), schema[c].name);
    if (it == header.end()) throw error(errc::unknown_column, "column '" + schema[c].name + "' not in " + source);
    pos[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::vector<double>> columns(schema.size());
  std::size_t dropped = 0, line_no = 1;
  std::vector<double> values(schema.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    bool missing = false;
    for (std::size_t c = 0; c < schema.size() && !missing; ++c) {
      if (pos[c] >= cells.size() || is_missing(cells[pos[c]])) {
        missing = true;
        break;
      }
      const std::string& cell = cells[pos[c]];
      const Column& col = schema[c];
      const auto code = col.labels.empty() ? std::nullopt : schema.code_of(c, cell);
      double v;
      if (code) {
        v = *code;
      } else if (!parse_number(cell, v)) {
        if (col.type.discrete() && !col.labels.empty())
          throw error(errc::unknown_value, "unknown label '" + cell + "' in column " + col.name + " at line " +
                                               std::to_string(line_no));
        throw error(errc::non_numeric_cell, "non-numeric cell '" + cell + "' in column " + col.name + " at line " +
                                                std::to_string(line_no));
      }
      if (col.type.discrete() && (v != std::floor(v) || v < 0 || v >= col.type.levels())) {
        if (col.role == Role::outcome)
          throw error(errc::outcome_not_binary, "outcome value '" + cell + "' at line " + std::to_string(line_no));
        throw error(errc::unknown_value, "value '" + cell + "' out of range for " + col.name + " at line " +
                                             std::to_string(line_no));
      }
      values[c] = v;
    }
    if (missing) {
      ++dropped;
      continue;
    }
    for (std::size_t c = 0; c < schema.size(); ++c) columns[c].push_back(values[c]);
  }
  Dataset out(std::move(schema), std::move(columns));
  out.provenance().source = source;
  out.provenance().dropped_rows = dropped;
  return out;
}

Dataset load_csv(const std::string& path, const SchemaConfig& config) {
  std::ifstream in(path);
  if (!in) throw error(errc::io_failure, "cannot open " + path);
  return read_csv(in, config, path);
}

void write_csv(const Dataset& data, std::ostream& out) {
  const FeatureSchema& schema = data.schema();
  for (std::size_t c = 0; c < schema.size(); ++c) out << (c ? "," : "") << quote(schema[c].name);
  out << '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (c) out << ',';
      const double v = data.at(r, c);
      const auto& labels = schema[c].labels;
      if (schema[c].type.discrete() && static_cast<std::size_t>(v) < labels.size())
        out << quote(labels[static_cast<std::size_t>(v)]);
      else
        out << format_double(v);
    }
    out << '\n';
  }
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw error(errc::io_failure, "cannot write " + path);
  write_csv(data, out);
  out.flush();
  if (!out) throw error(errc::io_failure, "failed writing " + path);
}

}  // namespace treatfair
