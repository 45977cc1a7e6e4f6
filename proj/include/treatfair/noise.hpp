#pragma once

#include <random>
#include <string>
#include <variant>
#include <vector>

namespace treatfair {

struct Bernoulli {
  double p = 0.5;
};
struct Gaussian {
  double mean = 0.0;
  double variance = 1.0;
};
/// Shape-scale parameterization; mean = shape * scale.
struct Gamma {
  double shape = 1.0;
  double scale = 1.0;
};
struct PointMass {
  double value = 0.0;
};
struct Logistic {
  double location = 0.0;
  double scale = 1.0;
};
/// Integer-valued noise on {0, ..., k-1}.
struct Categorical {
  std::vector<double> probabilities;
};

/// Distribution of one exogenous variable.
class NoiseSpec {
 public:
  using Family = std::variant<Bernoulli, Gaussian, Gamma, PointMass, Logistic, Categorical>;

  NoiseSpec(Family family);  // NOLINT(google-explicit-constructor)

  const Family& family() const { return family_; }
  std::string name() const;

  double sample(std::mt19937_64& rng) const;
  double cdf(double u) const;
  /// Generalized inverse inf{u : cdf(u) >= q}. Unbounded tails are clipped to
  /// +/- support_bound so that q = 0 and q = 1 stay finite.
  double quantile(double q) const;
  /// Log density (continuous) or log mass (discrete) at u.
  double log_density(double u) const;
  double mean() const;
  double variance() const;
  bool discrete() const;
  double lower() const;
  double upper() const;

  static constexpr double support_bound = 1e6;

 private:
  Family family_;
};

}  // namespace treatfair
