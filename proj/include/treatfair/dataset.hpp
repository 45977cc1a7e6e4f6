#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "treatfair/schema.hpp"

namespace treatfair {

struct Provenance {
  std::string source;
  std::uint64_t seed = 0;
  std::vector<std::string> history;
  std::size_t dropped_rows = 0;
};

/// Column-major table conforming to a FeatureSchema.
class Dataset {
 public:
  explicit Dataset(FeatureSchema schema);
  /// Takes ownership of column vectors (one per schema column, equal length).
  Dataset(FeatureSchema schema, std::vector<std::vector<double>> columns);

  const FeatureSchema& schema() const { return schema_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return columns_.size(); }

  double at(std::size_t row, std::size_t col) const { return columns_[col][row]; }
  std::span<const double> column(std::size_t col) const { return columns_[col]; }
  std::span<const double> column(std::string_view name) const { return columns_[schema_.index_of(name)]; }
  std::vector<double> row(std::size_t r) const;

  /// Validates the row against the schema before appending.
  void append_row(std::span<const double> values);
  void set_row(std::size_t r, std::span<const double> values);
  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset concat(const Dataset& other) const;

  Provenance& provenance() { return provenance_; }
  const Provenance& provenance() const { return provenance_; }

  /// Equality on schema and values; provenance is ignored.
  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.schema_ == b.schema_ && a.columns_ == b.columns_;
  }

 private:
  void check_row(std::span<const double> values) const;

  FeatureSchema schema_;
  std::vector<std::vector<double>> columns_;
  std::size_t rows_ = 0;
  Provenance provenance_;
};

}  // namespace treatfair
