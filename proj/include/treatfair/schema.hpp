#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace treatfair {

/// Causal role of a column. Declaration order is the causal block order.
enum class Role { sensitive, covariate, treatment, outcome };

enum class Kind { continuous, binary, categorical };

struct ColumnType {
  Kind kind = Kind::continuous;
  int cardinality = 0;  // categorical only

  static ColumnType continuous() { return {Kind::continuous, 0}; }
  static ColumnType binary() { return {Kind::binary, 2}; }
  static ColumnType categorical(int k) { return {Kind::categorical, k}; }

  bool discrete() const { return kind != Kind::continuous; }
  /// Number of admissible codes for discrete kinds.
  int levels() const { return kind == Kind::binary ? 2 : cardinality; }

  friend bool operator==(const ColumnType&, const ColumnType&) = default;
};

struct Column {
  std::string name;
  Role role = Role::covariate;
  ColumnType type;
  /// Optional text labels for discrete codes; labels[i] is code i.
  std::vector<std::string> labels;

  friend bool operator==(const Column&, const Column&) = default;
};

std::string_view to_string(Role role);
std::string_view to_string(Kind kind);
Role role_from_string(std::string_view text);
Kind kind_from_string(std::string_view text);

/// Ordered, role-tagged column list. Construction enforces the S -> X -> Z -> Y
/// block order, unique names, at least one sensitive and one treatment column,
/// and exactly one binary outcome (the last column).
class FeatureSchema {
 public:
  explicit FeatureSchema(std::vector<Column> columns);

  std::size_t size() const { return columns_.size(); }
  const Column& operator[](std::size_t i) const { return columns_[i]; }
  const std::vector<Column>& columns() const { return columns_; }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws error(unknown_column) when absent.
  std::size_t index_of(std::string_view name) const;
  std::vector<std::size_t> indices(Role role) const;
  std::size_t outcome() const { return columns_.size() - 1; }

  /// Clamp-and-floor a value into the column's admissible range; identity for
  /// continuous columns.
  double coerce(std::size_t column, double value) const;
  /// Code for a label of a discrete column, or std::nullopt.
  std::optional<double> code_of(std::size_t column, std::string_view label) const;

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

 private:
  std::vector<Column> columns_;
};

}  // namespace treatfair
