#include "treatfair/mechanism.hpp"

#include <cmath>
#include <sstream>

namespace treatfair {
namespace {

double linear(const std::vector<BasisTerm>& basis, const std::vector<double>& w, std::span<const double> values) {
  double acc = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) acc += w[j] * basis[j].value(values);
  return acc;
}

}  // namespace

double LearnedAdditive::mean(std::span<const double> values) const {
  return intercept + linear(basis, weights, values);
}

double LearnedThreshold::score(std::span<const double> values) const {
  return intercept + linear(basis, weights, values);
}

double Mechanism::raw(std::span<const double> values, double u) const {
  if (const auto* cf = std::get_if<ClosedForm>(&form)) return cf->evaluate(values, u);
  if (const auto* la = std::get_if<LearnedAdditive>(&form)) return la->mean(values) + u;
  const auto& lt = std::get<LearnedThreshold>(form);
  return lt.score(values) + lt.noise_scale * u - lt.threshold;
}

std::optional<double> Mechanism::invert(std::span<const double> values, double target) const {
  if (const auto* cf = std::get_if<ClosedForm>(&form)) {
    if (!cf->invert) return std::nullopt;
    const double u = cf->invert(values, target);
    if (!std::isfinite(u)) return std::nullopt;
    return u;
  }
  if (const auto* la = std::get_if<LearnedAdditive>(&form)) return target - la->mean(values);
  const auto& lt = std::get<LearnedThreshold>(form);
  if (lt.noise_scale == 0.0) return std::nullopt;
  return (target + lt.threshold - lt.score(values)) / lt.noise_scale;
}

std::string Mechanism::describe() const {
  if (const auto* cf = std::get_if<ClosedForm>(&form)) return cf->expression;
  std::ostringstream out;
  if (std::holds_alternative<LearnedAdditive>(form)) {
    out << "learned_additive(" << std::get<LearnedAdditive>(form).weights.size() << " terms)";
  } else {
    out << "learned_threshold(" << std::get<LearnedThreshold>(form).weights.size() << " terms)";
  }
  return out.str();
}

}  // namespace treatfair
