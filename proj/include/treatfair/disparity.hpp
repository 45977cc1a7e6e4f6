#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "treatfair/dataset.hpp"
#include "treatfair/scm.hpp"

namespace treatfair {

inline constexpr const char* kReportVersion = "1.0";

enum class DeltaKind { difference, abs_difference };
enum class Statistic { mean, median };

struct DisparityConfig {
  std::string sensitive_column;
  double factual_value = 0.0;         // s^F, the audited group
  double counterfactual_value = 1.0;  // s'
  DeltaKind delta = DeltaKind::difference;
  Statistic statistic = Statistic::median;
  std::size_t threads = 0;

  void validate(const FeatureSchema& schema) const;
};

struct TreatmentDisparity {
  std::string column;
  bool flip_rate = false;  // categorical treatment: mean/median hold the percentage of changed codes
  double mean = 0.0;
  double median = 0.0;

  double value(Statistic s) const { return s == Statistic::mean ? mean : median; }
};

struct LabelEffect {
  std::size_t rows = 0;
  std::size_t flips = 0;
  double percent = 0.0;
};

struct DisparityReport {
  DisparityConfig config;
  std::size_t audited_rows = 0;
  std::map<double, std::size_t> group_counts;
  std::vector<TreatmentDisparity> ttd;
  std::vector<TreatmentDisparity> dtd;
  std::array<LabelEffect, 2> ttd_e;  // indexed by factual label
  std::array<LabelEffect, 2> dtd_e;
};

/// Per-treatment statistic of Delta(z^SCF, z^F) over rows with S = s^F.
std::vector<double> ttd(const Dataset& data, const Scm& model, const DisparityConfig& config);
/// Same with the direct-path counterfactual z^SPCF.
std::vector<double> dtd(const Dataset& data, const Scm& model, const DisparityConfig& config);
/// Percentage of label flips under do(Z -> z^SCF), per factual label.
std::array<double, 2> ttd_e(const Dataset& data, const Scm& model, const DisparityConfig& config);
std::array<double, 2> dtd_e(const Dataset& data, const Scm& model, const DisparityConfig& config);

DisparityReport audit(const Dataset& data, const Scm& model, const DisparityConfig& config);

double median(std::vector<double> values);

// ---- several sensitive values / attributes ----

enum class Aggregator { none, avg, max, var };
enum class OutcomeAggregator { worst_case, mean, variance };
enum class FlipStrategy { single, joint };
enum class PathKind { total, direct };

struct MultiConfig {
  std::vector<std::string> sensitive_columns;
  /// Value set per sensitive column; an empty entry means the data support.
  std::vector<std::vector<double>> values;
  /// Restricts the audit to rows with these sensitive values (same order as
  /// sensitive_columns); all rows when empty.
  std::vector<double> factual;
  FlipStrategy flip = FlipStrategy::single;
  PathKind path = PathKind::total;
  Aggregator aggregator = Aggregator::avg;
  OutcomeAggregator outcome_aggregator = OutcomeAggregator::worst_case;
  /// Divide by the number of counterfactuals instead of (|S|-1)|S|/2.
  bool corrected = false;
  std::size_t threads = 0;
};

struct MultiReport {
  std::vector<std::string> treatments;
  std::vector<double> disparity;           // per treatment, expectation of the aggregate
  std::array<double, 2> effect_percent{};  // per factual label
  std::array<std::size_t, 2> label_rows{};
  std::size_t rows = 0;
  std::size_t counterfactuals_per_row = 0;
};

MultiReport audit_multi(const Dataset& data, const Scm& model, const MultiConfig& config);
std::vector<double> ttd_multi(const Dataset& data, const Scm& model, const MultiConfig& config);
std::array<double, 2> ttd_e_multi(const Dataset& data, const Scm& model, const MultiConfig& config);

/// Aggregates |Delta| values of one row; m = number of counterfactuals.
double aggregate(Aggregator a, std::span<const double> deltas, bool corrected);
double aggregate_outcome(OutcomeAggregator a, std::span<const double> flips, std::size_t worst);

nlohmann::json to_json(const DisparityReport& report, const FeatureSchema& schema);
nlohmann::json to_json(const MultiReport& report);
/// metric,treatment,label,statistic,value,rows
std::string to_csv(const DisparityReport& report);

}  // namespace treatfair
