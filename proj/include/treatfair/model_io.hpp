#pragma once

#include <string>

#include <json.hpp>

#include "treatfair/scm.hpp"
#include "treatfair/synth_loan.hpp"

namespace treatfair {

nlohmann::json schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const nlohmann::json& j);

nlohmann::json noise_to_json(const NoiseSpec& noise);
NoiseSpec noise_from_json(const nlohmann::json& j);

nlohmann::json synth_config_to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const nlohmann::json& j);

/// Learned models serialize their coefficients. Closed-form models cannot be
/// written out; the synthetic oracle is stored as a descriptor instead.
nlohmann::json model_to_json(const Scm& model);
nlohmann::json oracle_descriptor(const SynthConfig& config);
/// Accepts either document kind.
Scm model_from_json(const nlohmann::json& j);

Scm load_model(const std::string& path);
void save_json(const nlohmann::json& j, const std::string& path);
nlohmann::json load_json(const std::string& path);

}  // namespace treatfair
