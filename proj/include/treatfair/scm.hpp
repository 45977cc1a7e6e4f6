#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "treatfair/dataset.hpp"
#include "treatfair/mechanism.hpp"
#include "treatfair/noise.hpp"
#include "treatfair/schema.hpp"

namespace treatfair {

/// One value per schema column.
using Instance = std::vector<double>;
/// One abducted noise value per schema column.
using ExogenousVector = std::vector<double>;

struct Assignment {
  std::size_t column = 0;
  double value = 0.0;
};
using DoSet = std::vector<Assignment>;

/// Ordered stages of do-assignments. See path_specific_counterfactual.
struct InterventionPlan {
  std::vector<DoSet> stages;
};

/// Assigns every column of a role block; values are in schema order.
DoSet assign_block(const FeatureSchema& schema, Role role, std::span<const double> values);
/// Pins every column of a role block to its value in `source`.
DoSet pin_block(const FeatureSchema& schema, Role role, std::span<const double> source);

class Scm {
 public:
  Scm(FeatureSchema schema, std::vector<Mechanism> mechanisms, std::vector<NoiseSpec> noise);

  const FeatureSchema& schema() const { return schema_; }
  std::size_t size() const { return schema_.size(); }
  const Mechanism& mechanism(std::size_t col) const { return mechanisms_[col]; }
  const NoiseSpec& noise(std::size_t col) const { return noise_[col]; }
  const std::vector<Mechanism>& mechanisms() const { return mechanisms_; }
  const std::vector<NoiseSpec>& noises() const { return noise_; }

  /// True when `a` is a proper ancestor of `b`.
  bool is_ancestor(std::size_t a, std::size_t b) const { return ancestors_[b][a]; }
  /// True when some column of `from` has a directed path into `to`.
  bool has_path(std::span<const std::size_t> from, std::size_t to) const;

  /// Discretized node output for given (earlier) values and noise.
  double evaluate(std::span<const double> values, std::size_t col, double u) const;

 private:
  FeatureSchema schema_;
  std::vector<Mechanism> mechanisms_;
  std::vector<NoiseSpec> noise_;
  std::vector<std::vector<bool>> ancestors_;
};

/// Forward simulation; row r draws its noise from a stream seeded by (seed, r).
Dataset sample(const Scm& model, std::size_t n, std::uint64_t seed, std::size_t threads = 0);

ExogenousVector abduct(const Scm& model, std::span<const double> instance);
/// Noise of a single column given the instance's values for its parents.
double abduct_node(const Scm& model, std::span<const double> instance, std::size_t col);

/// Quantile interval [lo, hi] of the column's noise that yields `code`, given
/// parent values. Discrete columns only.
std::pair<double, double> noise_region(const Scm& model, std::span<const double> values, std::size_t col, double code);
/// P(column = 1 | parents) with the noise drawn from its prior.
double probability_one(const Scm& model, std::span<const double> values, std::size_t col);

Instance predict(const Scm& model, std::span<const double> u, const DoSet& overrides = {});
Instance counterfactual(const Scm& model, std::span<const double> instance, const DoSet& action);

/// Sequential interventions with exogenous splicing. Stage k is applied to the
/// world built from the spliced noise so far; the noise of stage-k targets is
/// then re-abducted in that world and spliced in. The result is predicted from
/// the spliced vector (untouched columns keep their factual noise).
Instance path_specific_counterfactual(const Scm& model, std::span<const double> instance,
                                      const InterventionPlan& plan);

/// [do(S_col -> value), do(X -> x^F)]: isolates direct sensitive paths into Z and Y.
InterventionPlan direct_path_plan(const Scm& model, std::span<const double> instance, std::size_t sensitive_col,
                                  double value);

/// Y under do(Z -> z_hat) with S, X and the abducted outcome noise kept factual.
double downstream_outcome(const Scm& model, std::span<const double> instance, std::span<const double> z_hat);

/// Y under [do(S_col -> value), do({X, Z} -> factual)].
double direct_sensitive_label_effect(const Scm& model, std::span<const double> instance, std::size_t sensitive_col,
                                     double value);

}  // namespace treatfair
