#include "treatfair/synth_loan.hpp"

#include <cmath>

#include "treatfair/error.hpp"

namespace treatfair {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

enum : std::size_t { G, A, E, I, S, L, D, Y };

double outcome_score(std::span<const double> v, double delta) {
  const double alpha = (v[I] > 0.0 && v[S] > 0.0) ? 1.0 : -1.0;
  return delta * (-v[L] - v[D]) + 0.3 * (v[I] + v[S] + alpha * v[I] * v[S]);
}

}  // namespace

std::string_view to_string(OutcomeVariant v) {
  return v == OutcomeVariant::deterministic_threshold ? "deterministic" : "noisy";
}

OutcomeVariant outcome_variant_from_string(std::string_view text) {
  if (text == "deterministic") return OutcomeVariant::deterministic_threshold;
  if (text == "noisy") return OutcomeVariant::noisy_threshold;
  throw error(errc::invalid_argument, "unknown outcome variant '" + std::string(text) + "'");
}

SynthConfig SynthConfig::balanced() { return SynthConfig{}; }

SynthConfig SynthConfig::unbalanced() {
  SynthConfig c;
  c.delta = 2.0;
  c.outcome_variant = OutcomeVariant::deterministic_threshold;
  return c;
}

void SynthConfig::validate() const {
  if (n < 1) throw error(errc::invalid_argument, "n must be >= 1");
  if (beta != 0.0 && beta != 0.03) throw error(errc::invalid_argument, "beta must be 0 or 0.03");
  for (double x : {gamma, delta, eta})
    if (!std::isfinite(x)) throw error(errc::invalid_argument, "synthetic parameters must be finite");
}

FeatureSchema synth_schema() {
  return FeatureSchema({
      {"G", Role::sensitive, ColumnType::binary(), {"F", "M"}},
      {"A", Role::sensitive, ColumnType::continuous(), {}},
      {"E", Role::covariate, ColumnType::continuous(), {}},
      {"I", Role::covariate, ColumnType::continuous(), {}},
      {"S_sav", Role::covariate, ColumnType::continuous(), {}},
      {"L", Role::treatment, ColumnType::continuous(), {}},
      {"D", Role::treatment, ColumnType::continuous(), {}},
      {"Y", Role::outcome, ColumnType::binary(), {}},
  });
}

Scm build_oracle(const SynthConfig& config) {
  config.validate();
  const double beta = config.beta, gamma = config.gamma, delta = config.delta;
  auto gaussian = [&](double b) {
    return NoiseSpec(Gaussian{0.0, config.gaussian_parameter == GaussianParameter::std_dev ? b * b : b});
  };
  using V = std::span<const double>;
  std::vector<Mechanism> mech;
  std::vector<NoiseSpec> noise;

  // binary G: latent u - 0.5 with u in {0, 1}
  mech.push_back({G, {}, ClosedForm{[](V, double u) { return u - 0.5; }, [](V, double t) { return t + 0.5; }, "G = U_G"}});
  noise.emplace_back(Bernoulli{0.5});

  mech.push_back({A, {}, ClosedForm{[](V, double u) { return -35.0 + u; }, [](V, double a) { return a + 35.0; },
                                    "A = -35 + U_A"}});
  noise.emplace_back(Gamma{10.0, 3.5});

  mech.push_back({E, {G, A},
                  ClosedForm{[](V v, double u) { return -0.5 + sigmoid(-1.0 + 0.5 * v[G] + sigmoid(0.1 * v[A]) + u); },
                             [](V v, double e) { return logit(e + 0.5) - (-1.0 + 0.5 * v[G] + sigmoid(0.1 * v[A])); },
                             "E = -0.5 + sigmoid(-1 + 0.5G + sigmoid(0.1A) + U_E)"}});
  noise.push_back(gaussian(0.25));

  auto i_mean = [](V v) { return -4.0 + 0.1 * (v[A] + 35.0) + 2.0 * v[G] + v[G] * v[E]; };
  mech.push_back({I, {G, A, E},
                  ClosedForm{[=](V v, double u) { return i_mean(v) + u; }, [=](V v, double x) { return x - i_mean(v); },
                             "I = -4 + 0.1(A+35) + 2G + G*E + U_I"}});
  noise.push_back(gaussian(4.0));

  auto s_mean = [](V v) { return -4.0 + 1.5 * (v[I] > 0.0 ? v[I] : 0.0); };
  mech.push_back({S, {I},
                  ClosedForm{[=](V v, double u) { return s_mean(v) + u; }, [=](V v, double x) { return x - s_mean(v); },
                             "S_sav = -4 + 1.5*1{I>0}*I + U_S"}});
  noise.push_back(gaussian(5.0));

  auto l_mean = [=](V v) { return 1.0 + 0.01 * (v[A] - 5.0) * (5.0 - v[A]) + 2.0 * (1.0 - v[G]) + beta * v[S]; };
  mech.push_back({L, {G, A, S},
                  ClosedForm{[=](V v, double u) { return l_mean(v) + u; }, [=](V v, double x) { return x - l_mean(v); },
                             "L = 1 + 0.01(A-5)(5-A) + 2(1-G) + beta*S_sav + U_L"}});
  noise.push_back(gaussian(10.0));

  auto d_mean = [](V v) { return -1.0 + 0.1 * v[A] + 3.0 * (1.0 - v[G]) + v[L]; };
  mech.push_back({D, {G, A, L},
                  ClosedForm{[=](V v, double u) { return d_mean(v) + u; }, [=](V v, double x) { return x - d_mean(v); },
                             "D = -1 + 0.1A + 3(1-G) + L + U_D"}});
  noise.push_back(gaussian(9.0));

  if (config.outcome_variant == OutcomeVariant::deterministic_threshold) {
    mech.push_back({Y, {G, I, S, L, D},
                    ClosedForm{[=](V v, double) {
                                 return sigmoid(outcome_score(v, delta)) - (0.5 + gamma * (1.0 - v[G]));
                               },
                               {},
                               "Y = 1{sigmoid(delta(-L-D) + 0.3(I + S + alpha*I*S)) >= 0.5 + gamma(1-G)}"}});
    noise.emplace_back(PointMass{0.0});
  } else {
    // sigmoid(x) >= 0.5 iff x >= 0, so the latent is the argument itself
    mech.push_back({Y, {G, I, S, L, D},
                    ClosedForm{[=](V v, double u) { return outcome_score(v, delta) + u * gamma * (1.0 - v[G]); },
                               [=](V v, double t) { return (t - outcome_score(v, delta)) / (gamma * (1.0 - v[G])); },
                               "Y = 1{sigmoid(delta(-L-D) + 0.3(I + S + alpha*I*S) + U_Y*gamma(1-G)) >= 0.5}"}});
    noise.push_back(gaussian(5.0));
  }
  return Scm(synth_schema(), std::move(mech), std::move(noise));
}

Dataset generate(const SynthConfig& config, std::size_t threads) {
  Dataset out = sample(build_oracle(config), config.n, config.seed, threads);
  out.provenance().source = "synthetic_loan";
  return out;
}

}  // namespace treatfair
