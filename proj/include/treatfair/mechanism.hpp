#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace treatfair {

/// Hand-written structural equation. Both callables receive the full row; only
/// columns before the node are meaningful. `invert` solves raw(values, u) = v
/// for u and may be left empty, in which case abduction falls back to bisection.
struct ClosedForm {
  using Fn = std::function<double(std::span<const double>, double)>;
  Fn evaluate;
  Fn invert;
  std::string expression;
};

/// One regression feature: values[first] or values[first] * values[second].
/// With level >= 0 the first factor becomes the indicator values[first] == level
/// (one-hot coding of categorical parents).
struct BasisTerm {
  std::size_t first = 0;
  std::optional<std::size_t> second;
  int level = -1;

  double value(std::span<const double> values) const {
    const double a = level >= 0 ? (values[first] == level ? 1.0 : 0.0) : values[first];
    return second ? a * values[*second] : a;
  }
  friend bool operator==(const BasisTerm&, const BasisTerm&) = default;
};

/// value = intercept + w . basis + u, with u ~ N(0, residual_scale^2).
struct LearnedAdditive {
  std::vector<BasisTerm> basis;
  std::vector<double> weights;
  double intercept = 0.0;
  double residual_scale = 1.0;

  double mean(std::span<const double> values) const;
};

/// latent = intercept + w . basis + noise_scale * u - threshold; output 1 iff latent >= 0.
struct LearnedThreshold {
  std::vector<BasisTerm> basis;
  std::vector<double> weights;
  double intercept = 0.0;
  double noise_scale = 1.0;
  double threshold = 0.0;

  double score(std::span<const double> values) const;
};

struct Mechanism {
  using Form = std::variant<ClosedForm, LearnedAdditive, LearnedThreshold>;

  std::size_t node = 0;
  std::vector<std::size_t> parents;
  Form form;

  /// Pre-discretization output: the value for continuous nodes, the latent
  /// score for binary nodes (1 iff >= 0), the unclamped code for categorical.
  double raw(std::span<const double> values, double u) const;
  /// u with raw(values, u) == target when a closed-form inverse exists.
  std::optional<double> invert(std::span<const double> values, double target) const;
  std::string describe() const;
};

}  // namespace treatfair
