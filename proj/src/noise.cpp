#include "treatfair/noise.hpp"

#include <algorithm>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "treatfair/error.hpp"

namespace treatfair {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite(double x) { return std::isfinite(x); }

}  // namespace

NoiseSpec::NoiseSpec(Family family) : family_(std::move(family)) {
  std::visit(overloaded{
                 [](const Bernoulli& b) {
                   if (!(b.p >= 0.0 && b.p <= 1.0)) throw error(errc::invalid_argument, "Bernoulli p must lie in [0,1]");
                 },
                 [](const Gaussian& g) {
                   if (!finite(g.mean) || !finite(g.variance) || g.variance < 0.0)
                     throw error(errc::invalid_argument, "Gaussian needs finite mean and variance >= 0");
                 },
                 [](const Gamma& g) {
                   if (!(g.shape > 0.0) || !(g.scale > 0.0) || !finite(g.shape) || !finite(g.scale))
                     throw error(errc::invalid_argument, "Gamma needs shape > 0 and scale > 0");
                 },
                 [](const PointMass& p) {
                   if (!finite(p.value)) throw error(errc::invalid_argument, "PointMass value must be finite");
                 },
                 [](const Logistic& l) {
                   if (!finite(l.location) || !(l.scale > 0.0) || !finite(l.scale))
                     throw error(errc::invalid_argument, "Logistic needs finite location and scale > 0");
                 },
                 [](const Categorical& c) {
                   if (c.probabilities.empty()) throw error(errc::invalid_argument, "Categorical needs probabilities");
                   double total = 0.0;
                   for (double p : c.probabilities) {
                     if (!(p >= 0.0)) throw error(errc::invalid_argument, "Categorical probabilities must be >= 0");
                     total += p;
                   }
                   if (std::abs(total - 1.0) > 1e-9)
                     throw error(errc::invalid_argument, "Categorical probabilities must sum to 1");
                 },
             },
             family_);
}

std::string NoiseSpec::name() const {
  return std::visit(overloaded{
                        [](const Bernoulli&) { return std::string("bernoulli"); },
                        [](const Gaussian&) { return std::string("gaussian"); },
                        [](const Gamma&) { return std::string("gamma"); },
                        [](const PointMass&) { return std::string("point_mass"); },
                        [](const Logistic&) { return std::string("logistic"); },
                        [](const Categorical&) { return std::string("categorical"); },
                    },
                    family_);
}

double NoiseSpec::sample(std::mt19937_64& rng) const {
  return std::visit(overloaded{
                        [&](const Bernoulli& b) {
                          return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < b.p ? 1.0 : 0.0;
                        },
                        [&](const Gaussian& g) {
                          if (g.variance == 0.0) return g.mean;
                          return std::normal_distribution<double>(g.mean, std::sqrt(g.variance))(rng);
                        },
                        [&](const Gamma& g) { return std::gamma_distribution<double>(g.shape, g.scale)(rng); },
                        [&](const PointMass& p) { return p.value; },
                        [&](const Logistic& l) {
                          double q = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
                          q = std::clamp(q, 1e-300, 1.0 - 1e-16);
                          return l.location + l.scale * std::log(q / (1.0 - q));
                        },
                        [&](const Categorical& c) {
                          const double q = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
                          double acc = 0.0;
                          for (std::size_t k = 0; k < c.probabilities.size(); ++k) {
                            acc += c.probabilities[k];
                            if (q < acc) return static_cast<double>(k);
                          }
                          return static_cast<double>(c.probabilities.size() - 1);
                        },
                    },
                    family_);
}

double NoiseSpec::cdf(double u) const {
  return std::visit(overloaded{
                        [&](const Bernoulli& b) { return u < 0.0 ? 0.0 : (u < 1.0 ? 1.0 - b.p : 1.0); },
                        [&](const Gaussian& g) {
                          if (g.variance == 0.0) return u < g.mean ? 0.0 : 1.0;
                          if (u == kInf) return 1.0;
                          if (u == -kInf) return 0.0;
                          return boost::math::cdf(boost::math::normal(g.mean, std::sqrt(g.variance)), u);
                        },
                        [&](const Gamma& g) {
                          if (u <= 0.0) return 0.0;
                          if (u == kInf) return 1.0;
                          return boost::math::cdf(boost::math::gamma_distribution<double>(g.shape, g.scale), u);
                        },
                        [&](const PointMass& p) { return u < p.value ? 0.0 : 1.0; },
                        [&](const Logistic& l) { return 1.0 / (1.0 + std::exp(-(u - l.location) / l.scale)); },
                        [&](const Categorical& c) {
                          if (u < 0.0) return 0.0;
                          const auto k = static_cast<std::size_t>(std::floor(u));
                          if (k + 1 >= c.probabilities.size()) return 1.0;
                          return std::min(1.0, std::accumulate(c.probabilities.begin(),
                                                               c.probabilities.begin() + static_cast<long>(k + 1), 0.0));
                        },
                    },
                    family_);
}

double NoiseSpec::quantile(double q) const {
  q = std::clamp(q, 0.0, 1.0);
  return std::visit(overloaded{
                        [&](const Bernoulli& b) { return q <= 1.0 - b.p ? 0.0 : 1.0; },
                        [&](const Gaussian& g) {
                          if (g.variance == 0.0) return g.mean;
                          if (q <= 0.0) return -support_bound;
                          if (q >= 1.0) return support_bound;
                          const double v =
                              boost::math::quantile(boost::math::normal(g.mean, std::sqrt(g.variance)), q);
                          return std::clamp(v, -support_bound, support_bound);
                        },
                        [&](const Gamma& g) {
                          if (q <= 0.0) return 0.0;
                          if (q >= 1.0) return support_bound;
                          const double v =
                              boost::math::quantile(boost::math::gamma_distribution<double>(g.shape, g.scale), q);
                          return std::min(v, support_bound);
                        },
                        [&](const PointMass& p) { return p.value; },
                        [&](const Logistic& l) {
                          if (q <= 0.0) return -support_bound;
                          if (q >= 1.0) return support_bound;
                          return std::clamp(l.location + l.scale * std::log(q / (1.0 - q)), -support_bound,
                                            support_bound);
                        },
                        [&](const Categorical& c) {
                          double acc = 0.0;
                          for (std::size_t k = 0; k < c.probabilities.size(); ++k) {
                            acc += c.probabilities[k];
                            if (q <= acc) return static_cast<double>(k);
                          }
                          return static_cast<double>(c.probabilities.size() - 1);
                        },
                    },
                    family_);
}

double NoiseSpec::log_density(double u) const {
  return std::visit(overloaded{
                        [&](const Bernoulli& b) {
                          if (u == 1.0) return std::log(b.p);
                          if (u == 0.0) return std::log1p(-b.p);
                          return -kInf;
                        },
                        [&](const Gaussian& g) {
                          if (g.variance == 0.0) return u == g.mean ? 0.0 : -kInf;
                          const double z = u - g.mean;
                          return -0.5 * (std::log(2.0 * std::numbers::pi * g.variance) + z * z / g.variance);
                        },
                        [&](const Gamma& g) {
                          if (u <= 0.0) return -kInf;
                          return (g.shape - 1.0) * std::log(u) - u / g.scale - std::lgamma(g.shape) -
                                 g.shape * std::log(g.scale);
                        },
                        [&](const PointMass& p) { return u == p.value ? 0.0 : -kInf; },
                        [&](const Logistic& l) {
                          const double z = (u - l.location) / l.scale;
                          return -z - std::log(l.scale) - 2.0 * std::log1p(std::exp(-z));
                        },
                        [&](const Categorical& c) {
                          const double k = std::floor(u);
                          if (k != u || k < 0.0 || k >= static_cast<double>(c.probabilities.size())) return -kInf;
                          return std::log(c.probabilities[static_cast<std::size_t>(k)]);
                        },
                    },
                    family_);
}

double NoiseSpec::mean() const {
  return std::visit(overloaded{
                        [](const Bernoulli& b) { return b.p; },
                        [](const Gaussian& g) { return g.mean; },
                        [](const Gamma& g) { return g.shape * g.scale; },
                        [](const PointMass& p) { return p.value; },
                        [](const Logistic& l) { return l.location; },
                        [](const Categorical& c) {
                          double m = 0.0;
                          for (std::size_t k = 0; k < c.probabilities.size(); ++k) m += k * c.probabilities[k];
                          return m;
                        },
                    },
                    family_);
}

double NoiseSpec::variance() const {
  return std::visit(overloaded{
                        [](const Bernoulli& b) { return b.p * (1.0 - b.p); },
                        [](const Gaussian& g) { return g.variance; },
                        [](const Gamma& g) { return g.shape * g.scale * g.scale; },
                        [](const PointMass&) { return 0.0; },
                        [](const Logistic& l) { return l.scale * l.scale * std::numbers::pi * std::numbers::pi / 3.0; },
                        [](const Categorical& c) {
                          double m = 0.0, m2 = 0.0;
                          for (std::size_t k = 0; k < c.probabilities.size(); ++k) {
                            m += k * c.probabilities[k];
                            m2 += static_cast<double>(k * k) * c.probabilities[k];
                          }
                          return m2 - m * m;
                        },
                    },
                    family_);
}

bool NoiseSpec::discrete() const {
  return std::holds_alternative<Bernoulli>(family_) || std::holds_alternative<PointMass>(family_) ||
         std::holds_alternative<Categorical>(family_);
}

double NoiseSpec::lower() const { return quantile(0.0); }

double NoiseSpec::upper() const { return quantile(1.0); }

}  // namespace treatfair
