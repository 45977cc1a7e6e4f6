#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "treatfair/dataset.hpp"
#include "treatfair/disparity.hpp"
#include "treatfair/scm.hpp"

namespace treatfair {

enum class FairnessCriterion { none, demographic_parity, equalized_odds };

std::string_view to_string(FairnessCriterion c);
FairnessCriterion criterion_from_string(std::string_view text);

struct PredictorFeature {
  std::string name;
  std::size_t column = 0;
  int level = -1;  // one-hot level for categorical columns
  double mean = 0.0;
  double scale = 1.0;
};

struct PredictorModel {
  std::vector<PredictorFeature> features;
  std::vector<double> weights;
  double intercept = 0.0;
  std::string sensitive_column;
  std::size_t sensitive_index = 0;
  std::map<double, double> thresholds;  // per sensitive value
  FairnessCriterion criterion = FairnessCriterion::none;
  bool feasible = true;
  std::string objective = "balanced_accuracy";
  std::uint64_t split_seed = 0;
  std::size_t data_rows = 0;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;

  /// P(Y = 1 | s, x, z).
  double score(std::span<const double> row) const;
  bool accept(std::span<const double> row) const;
};

/// Stratified by label; `train_fraction` of each class goes to the training rows.
void stratified_split(const Dataset& data, double train_fraction, std::uint64_t seed, std::vector<std::size_t>& train,
                      std::vector<std::size_t>& test);

/// Class-balanced logistic regression on standardized S, X, Z features.
PredictorModel train(const Dataset& data, const FeatureSchema& schema, const std::string& sensitive_column,
                     std::uint64_t seed, double train_fraction = 0.6);

/// Per-group threshold search on the training rows (grid step 0.002). Weights
/// are left untouched.
PredictorModel postprocess(PredictorModel model, const Dataset& data, FairnessCriterion criterion);

struct PredictorMetrics {
  std::size_t rows = 0;
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  double dp_gap = 0.0;
  double tpr_gap = 0.0;
  double fpr_gap = 0.0;
  double eod_gap = 0.0;
  std::map<double, double> positive_rate;
};

PredictorMetrics evaluate(const PredictorModel& model, const Dataset& data, std::span<const std::size_t> rows);

/// Keeps the rows the predictor accepts, then runs the disparity audit on them.
DisparityReport audit_under_policy(const Dataset& data, const Scm& model, const PredictorModel& predictor,
                                   const DisparityConfig& config);

nlohmann::json to_json(const PredictorModel& model);
nlohmann::json to_json(const PredictorMetrics& metrics);
PredictorModel predictor_from_json(const nlohmann::json& j, const FeatureSchema& schema);

}  // namespace treatfair
