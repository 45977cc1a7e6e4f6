#include "treatfair/dataset.hpp"

#include <cmath>

#include "treatfair/error.hpp"

namespace treatfair {

Dataset::Dataset(FeatureSchema schema) : schema_(std::move(schema)), columns_(schema_.size()) {}

Dataset::Dataset(FeatureSchema schema, std::vector<std::vector<double>> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  if (columns_.size() != schema_.size())
    throw error(errc::schema_mismatch, "column count does not match schema");
  rows_ = columns_.empty() ? 0 : columns_[0].size();
  for (const auto& c : columns_)
    if (c.size() != rows_) throw error(errc::schema_mismatch, "columns have unequal lengths");
  std::vector<double> buf(cols());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols(); ++c) buf[c] = columns_[c][r];
    check_row(buf);
  }
}

void Dataset::check_row(std::span<const double> values) const {
  if (values.size() != schema_.size())
    throw error(errc::schema_mismatch, "row has " + std::to_string(values.size()) + " values, schema has " +
                                           std::to_string(schema_.size()));
  for (std::size_t c = 0; c < values.size(); ++c) {
    const double v = values[c];
    const Column& col = schema_[c];
    if (!std::isfinite(v)) throw error(errc::invalid_argument, "non-finite value in column " + col.name);
    if (col.type.discrete()) {
      if (v != std::floor(v) || v < 0 || v >= col.type.levels()) {
        if (col.role == Role::outcome) throw error(errc::outcome_not_binary, "outcome value must be 0 or 1");
        throw error(errc::invalid_argument, "value out of range for discrete column " + col.name);
      }
    }
  }
}

std::vector<double> Dataset::row(std::size_t r) const {
  std::vector<double> out(cols());
  for (std::size_t c = 0; c < cols(); ++c) out[c] = columns_[c][r];
  return out;
}

void Dataset::append_row(std::span<const double> values) {
  check_row(values);
  for (std::size_t c = 0; c < cols(); ++c) columns_[c].push_back(values[c]);
  ++rows_;
}

void Dataset::set_row(std::size_t r, std::span<const double> values) {
  check_row(values);
  for (std::size_t c = 0; c < cols(); ++c) columns_[c][r] = values[c];
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out(schema_);
  for (std::size_t c = 0; c < cols(); ++c) {
    out.columns_[c].reserve(rows.size());
    for (std::size_t r : rows) out.columns_[c].push_back(columns_[c].at(r));
  }
  out.rows_ = rows.size();
  out.provenance_ = provenance_;
  out.provenance_.history.push_back("subset:" + std::to_string(rows.size()));
  return out;
}

Dataset Dataset::concat(const Dataset& other) const {
  if (!(other.schema_ == schema_)) throw error(errc::schema_mismatch, "cannot concatenate datasets with different schemas");
  Dataset out = *this;
  for (std::size_t c = 0; c < cols(); ++c)
    out.columns_[c].insert(out.columns_[c].end(), other.columns_[c].begin(), other.columns_[c].end());
  out.rows_ += other.rows_;
  return out;
}

}  // namespace treatfair
