#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treatfair/dataset.hpp"
#include "treatfair/scm.hpp"

namespace treatfair {

enum class Learner { oracle, additive_noise };
enum class BasisKind { linear, linear_plus_pairwise };

std::string_view to_string(BasisKind b);
BasisKind basis_from_string(std::string_view text);

struct EstimatorConfig {
  Learner learner = Learner::additive_noise;
  std::optional<Scm> oracle;  // required when learner == oracle
  BasisKind basis = BasisKind::linear_plus_pairwise;
  double regularization = 1e-6;
  std::array<double, 3> train_split{0.8, 0.1, 0.1};
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  void validate() const;
};

struct DataSplit {
  Dataset train;
  Dataset validation;
  Dataset test;
};

/// Shuffled split by the given fractions; deterministic in seed.
DataSplit split(const Dataset& data, const std::array<double, 3>& fractions, std::uint64_t seed);

/// Parent set used by the learner: sensitive columns are roots; every other
/// column depends on all earlier columns in schema order.
std::vector<std::size_t> learned_parents(const FeatureSchema& schema, std::size_t col);
/// Regression terms for a node: one-hot codes for categorical parents, the raw
/// value otherwise. The pairwise basis adds sensitive x covariate products and
/// sensitive x sensitive products (squares of continuous sensitive columns too).
std::vector<BasisTerm> learned_basis(const FeatureSchema& schema, std::size_t col, BasisKind basis);

/// Fits on the training fraction of `data`. The oracle learner returns the
/// supplied model as is.
Scm fit(const Dataset& data, const FeatureSchema& schema, const EstimatorConfig& config);

struct NodeGoodness {
  std::string column;
  std::size_t n = 0;
  double log_likelihood = 0.0;
  double mean_log_likelihood = 0.0;
  double residual_mean = 0.0;
  double residual_variance = 0.0;
  double standard_error = 0.0;  // of the residual mean
};

struct GoodnessReport {
  std::vector<NodeGoodness> nodes;
  double total_log_likelihood = 0.0;
};

GoodnessReport goodness(const Scm& model, const Dataset& holdout, std::size_t threads = 0);

}  // namespace treatfair
