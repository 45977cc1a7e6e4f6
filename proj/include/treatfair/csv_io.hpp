#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "treatfair/dataset.hpp"

namespace treatfair {

/// Role map for a CSV file. Columns not named here are ignored on load.
struct SchemaConfig {
  std::vector<std::string> sensitive;
  std::vector<std::string> covariates;
  std::vector<std::string> treatments;
  std::string outcome;
  std::map<std::string, std::string> kinds;  // column -> continuous | binary | categorical
  std::map<std::string, std::vector<std::string>> categorical_codes;  // column -> labels, code = position

  static SchemaConfig from_json(const nlohmann::json& j);
  static SchemaConfig from_schema(const FeatureSchema& schema);
  static SchemaConfig load(const std::string& path);
  nlohmann::json to_json() const;
  void save(const std::string& path) const;

  /// Columns in block order S, X, Z, Y.
  FeatureSchema to_schema() const;
};

/// Values that mark a missing cell.
bool is_missing(std::string_view cell);

Dataset load_csv(const std::string& path, const SchemaConfig& config);
Dataset read_csv(std::istream& in, const SchemaConfig& config, const std::string& source = "<stream>");
void save_csv(const Dataset& data, const std::string& path);
void write_csv(const Dataset& data, std::ostream& out);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace treatfair
