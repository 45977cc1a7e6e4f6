#include "treatfair/schema.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "treatfair/error.hpp"

namespace treatfair {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::sensitive: return "sensitive";
    case Role::covariate: return "covariate";
    case Role::treatment: return "treatment";
    case Role::outcome: return "outcome";
  }
  return "?";
}

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::continuous: return "continuous";
    case Kind::binary: return "binary";
    case Kind::categorical: return "categorical";
  }
  return "?";
}

Role role_from_string(std::string_view text) {
  if (text == "sensitive") return Role::sensitive;
  if (text == "covariate") return Role::covariate;
  if (text == "treatment") return Role::treatment;
  if (text == "outcome") return Role::outcome;
  throw error(errc::invalid_argument, "unknown role '" + std::string(text) + "'");
}

Kind kind_from_string(std::string_view text) {
  if (text == "continuous") return Kind::continuous;
  if (text == "binary") return Kind::binary;
  if (text == "categorical") return Kind::categorical;
  throw error(errc::invalid_argument, "unknown kind '" + std::string(text) + "'");
}

FeatureSchema::FeatureSchema(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw error(errc::role_missing, "schema has no columns");

  std::set<std::string> names;
  for (const auto& c : columns_) {
    if (c.name.empty()) throw error(errc::invalid_argument, "empty column name");
    if (!names.insert(c.name).second)
      throw error(errc::invalid_argument, "duplicate column name '" + c.name + "'");
    if (c.type.kind == Kind::categorical && c.type.cardinality < 2)
      throw error(errc::invalid_argument, "categorical column '" + c.name + "' needs cardinality >= 2");
    if (!c.labels.empty() && static_cast<int>(c.labels.size()) != c.type.levels())
      throw error(errc::invalid_argument, "label count does not match cardinality for '" + c.name + "'");
  }

  for (std::size_t i = 1; i < columns_.size(); ++i) {
    if (columns_[i].role < columns_[i - 1].role)
      throw error(errc::invalid_argument,
                  "column '" + columns_[i].name + "' breaks the sensitive -> covariate -> treatment -> outcome order");
  }

  auto count = [&](Role r) {
    return std::count_if(columns_.begin(), columns_.end(), [r](const Column& c) { return c.role == r; });
  };
  if (count(Role::sensitive) == 0) throw error(errc::role_missing, "no sensitive column");
  if (count(Role::treatment) == 0) throw error(errc::role_missing, "no treatment column");
  if (count(Role::outcome) != 1) throw error(errc::role_missing, "exactly one outcome column is required");
  if (columns_.back().type.kind != Kind::binary)
    throw error(errc::outcome_not_binary, "outcome column '" + columns_.back().name + "' must be binary");
}

std::optional<std::size_t> FeatureSchema::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  return std::nullopt;
}

std::size_t FeatureSchema::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw error(errc::unknown_column, "no column named '" + std::string(name) + "'");
}

std::vector<std::size_t> FeatureSchema::indices(Role role) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].role == role) out.push_back(i);
  return out;
}

double FeatureSchema::coerce(std::size_t column, double value) const {
  const auto& type = columns_[column].type;
  if (!type.discrete()) return value;
  const double top = static_cast<double>(type.levels() - 1);
  return std::floor(std::clamp(value, 0.0, top));
}

std::optional<double> FeatureSchema::code_of(std::size_t column, std::string_view label) const {
  const auto& labels = columns_[column].labels;
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<double>(it - labels.begin());
}

}  // namespace treatfair
