#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "treatfair/dataset.hpp"
#include "treatfair/scm.hpp"

namespace treatfair {

struct FairDataset {
  Dataset data;
  std::size_t intervened_rows = 0;
  double factual_rate = 0.0;  // P[Y = 1 | disadvantaged] in the input
  double fair_rate = 0.0;     // same in the output
  bool non_harm = true;       // fair_rate >= factual_rate
};

/// Disadvantaged rows get z^SCF = treatments of counterfactual(do(S -> advantaged))
/// and y^CF(do(Z -> z^SCF)); everything else is copied.
FairDataset build_fair_dataset(const Dataset& data, const Scm& model, const std::string& sensitive_column,
                               double disadvantaged, double advantaged, std::size_t threads = 0);

enum class PolicyKind {
  factual,                  // z' = z^F
  empirical_conditional,    // z' drawn from treatment rows of `group` in the reference data
  own_group_conditional,    // z' drawn from treatment rows of the row's own group
  sensitive_counterfactual  // z' = z^SCF under do(S -> group)
};

struct TreatmentPolicy {
  PolicyKind kind = PolicyKind::factual;
  std::string sensitive_column;
  double group = 0.0;
  std::uint64_t seed = 1;
  std::size_t sample_count = 256;
};

/// Policy bound to reference data. Empirical draws use a randomly shifted van
/// der Corput sequence over the lexicographically sorted pool, one shift per
/// row, which keeps the Monte Carlo error well under 1/sqrt(sample_count).
class ResolvedPolicy {
 public:
  ResolvedPolicy(const Scm& model, const Dataset& reference, TreatmentPolicy policy);

  const TreatmentPolicy& policy() const { return policy_; }
  /// Treatment vectors to average over for one row.
  std::vector<std::vector<double>> draws(std::span<const double> row, std::size_t row_index) const;

 private:
  const Scm* model_;
  TreatmentPolicy policy_;
  std::size_t scol_ = 0;
  std::map<double, std::vector<std::vector<double>>> pools_;
};

/// Monte Carlo estimate of E_{z'}[P(Y = 0 | s^F, x^F, do(Z -> z'))] with the
/// outcome noise taken from its prior.
double fair_risk_score(const Scm& model, std::span<const double> row, std::size_t row_index,
                       const ResolvedPolicy& policy);
std::vector<double> fair_risk_scores(const Dataset& data, const Scm& model, const ResolvedPolicy& policy,
                                     std::size_t threads = 0);

/// Empirical CDF on thresholds 0, 0.01, ..., 1.
std::vector<std::pair<double, double>> risk_cdf(std::span<const double> scores);
/// Two-sample Kolmogorov-Smirnov statistic.
double kolmogorov_distance(std::vector<double> a, std::vector<double> b);

struct RateDuration {
  double rate_percent = 10.0;
  std::string duration_column;  // months
};
struct AnnuityAmount {
  std::string annuity_column;
  double years = 15.0;
};
using EsiFormula = std::variant<RateDuration, AnnuityAmount>;

/// Group-wise mean of (1 - y) * amount, keyed by the value of `group_column`.
std::map<double, double> lgd(const Dataset& data, const std::string& amount_column, const std::string& group_column);
std::map<double, double> esi(const Dataset& data, const EsiFormula& formula, const std::string& amount_column,
                             const std::string& group_column);

struct GroupLoss {
  std::size_t rows = 0;
  double lgd = 0.0;
  double esi = 0.0;
};

struct LossReport {
  std::string tag;
  std::map<double, GroupLoss> groups;
};

LossReport losses(const Dataset& data, const EsiFormula& formula, const std::string& amount_column,
                  const std::string& group_column, std::string tag);

}  // namespace treatfair
