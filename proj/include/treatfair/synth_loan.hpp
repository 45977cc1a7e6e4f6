#pragma once

#include <cstdint>
#include <string_view>

#include "treatfair/dataset.hpp"
#include "treatfair/scm.hpp"

namespace treatfair {

enum class OutcomeVariant { deterministic_threshold, noisy_threshold };
/// How the second argument of the synthetic Gaussian noise terms is read.
enum class GaussianParameter { std_dev, variance };

std::string_view to_string(OutcomeVariant v);
OutcomeVariant outcome_variant_from_string(std::string_view text);

struct SynthConfig {
  double beta = 0.03;
  double gamma = 0.5;
  double delta = 1.0;
  double eta = 5.0;  // carried for the record; no equation uses it
  std::size_t n = 5000;
  std::uint64_t seed = 1;
  OutcomeVariant outcome_variant = OutcomeVariant::noisy_threshold;
  GaussianParameter gaussian_parameter = GaussianParameter::std_dev;

  /// delta = 1, noisy outcome.
  static SynthConfig balanced();
  /// delta = 2, deterministic outcome.
  static SynthConfig unbalanced();

  void validate() const;
};

/// G, A | E, I, S_sav | L, D | Y. G is binary with labels F (0) and M (1).
FeatureSchema synth_schema();

Scm build_oracle(const SynthConfig& config);
Dataset generate(const SynthConfig& config, std::size_t threads = 0);

}  // namespace treatfair
