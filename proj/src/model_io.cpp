#include "treatfair/model_io.hpp"

#include <fstream>

#include "treatfair/disparity.hpp"
#include "treatfair/error.hpp"

namespace treatfair {
namespace {

nlohmann::json basis_to_json(const std::vector<BasisTerm>& basis, const FeatureSchema& schema) {
  auto out = nlohmann::json::array();
  for (const auto& t : basis) {
    nlohmann::json term = {{"first", schema[t.first].name}};
    term["second"] = t.second ? nlohmann::json(schema[*t.second].name) : nlohmann::json(nullptr);
    if (t.level >= 0) term["level"] = t.level;
    out.push_back(term);
  }
  return out;
}

std::vector<BasisTerm> basis_from_json(const nlohmann::json& j, const FeatureSchema& schema) {
  std::vector<BasisTerm> out;
  for (const auto& t : j) {
    BasisTerm b;
    b.first = schema.index_of(t.at("first").get<std::string>());
    if (t.contains("second") && !t.at("second").is_null()) b.second = schema.index_of(t.at("second").get<std::string>());
    b.level = t.value("level", -1);
    out.push_back(b);
  }
  return out;
}

}  // namespace

nlohmann::json schema_to_json(const FeatureSchema& schema) {
  auto cols = nlohmann::json::array();
  for (const auto& c : schema.columns()) {
    nlohmann::json col = {{"name", c.name}, {"role", to_string(c.role)}, {"kind", to_string(c.type.kind)}};
    if (c.type.kind == Kind::categorical) col["cardinality"] = c.type.cardinality;
    if (!c.labels.empty()) col["labels"] = c.labels;
    cols.push_back(col);
  }
  return cols;
}

FeatureSchema schema_from_json(const nlohmann::json& j) {
  std::vector<Column> cols;
  for (const auto& c : j) {
    Column col;
    col.name = c.at("name").get<std::string>();
    col.role = role_from_string(c.at("role").get<std::string>());
    const Kind kind = kind_from_string(c.at("kind").get<std::string>());
    col.type = kind == Kind::categorical  ? ColumnType::categorical(c.at("cardinality").get<int>())
               : kind == Kind::binary     ? ColumnType::binary()
                                          : ColumnType::continuous();
    col.labels = c.value("labels", std::vector<std::string>{});
    cols.push_back(std::move(col));
  }
  return FeatureSchema(std::move(cols));
}

nlohmann::json noise_to_json(const NoiseSpec& noise) {
  const auto& f = noise.family();
  if (const auto* b = std::get_if<Bernoulli>(&f)) return {{"family", "bernoulli"}, {"p", b->p}};
  if (const auto* g = std::get_if<Gaussian>(&f)) return {{"family", "gaussian"}, {"mean", g->mean}, {"variance", g->variance}};
  if (const auto* g = std::get_if<Gamma>(&f)) return {{"family", "gamma"}, {"shape", g->shape}, {"scale", g->scale}};
  if (const auto* p = std::get_if<PointMass>(&f)) return {{"family", "point_mass"}, {"value", p->value}};
  if (const auto* l = std::get_if<Logistic>(&f))
    return {{"family", "logistic"}, {"location", l->location}, {"scale", l->scale}};
  return {{"family", "categorical"}, {"probabilities", std::get<Categorical>(f).probabilities}};
}

NoiseSpec noise_from_json(const nlohmann::json& j) {
  const auto family = j.at("family").get<std::string>();
  if (family == "bernoulli") return NoiseSpec(Bernoulli{j.at("p").get<double>()});
  if (family == "gaussian") return NoiseSpec(Gaussian{j.at("mean").get<double>(), j.at("variance").get<double>()});
  if (family == "gamma") return NoiseSpec(Gamma{j.at("shape").get<double>(), j.at("scale").get<double>()});
  if (family == "point_mass") return NoiseSpec(PointMass{j.at("value").get<double>()});
  if (family == "logistic") return NoiseSpec(Logistic{j.at("location").get<double>(), j.at("scale").get<double>()});
  if (family == "categorical") return NoiseSpec(Categorical{j.at("probabilities").get<std::vector<double>>()});
  throw error(errc::invalid_argument, "unknown noise family '" + family + "'");
}

nlohmann::json synth_config_to_json(const SynthConfig& c) {
  return {{"beta", c.beta},
          {"gamma", c.gamma},
          {"delta", c.delta},
          {"eta", c.eta},
          {"n", c.n},
          {"seed", c.seed},
          {"variant", to_string(c.outcome_variant)},
          {"gaussian_parameter", c.gaussian_parameter == GaussianParameter::std_dev ? "std_dev" : "variance"}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.beta = j.value("beta", c.beta);
  c.gamma = j.value("gamma", c.gamma);
  c.delta = j.value("delta", c.delta);
  c.eta = j.value("eta", c.eta);
  c.n = j.value("n", c.n);
  c.seed = j.value("seed", c.seed);
  c.outcome_variant = outcome_variant_from_string(j.value("variant", std::string(to_string(c.outcome_variant))));
  const auto gp = j.value("gaussian_parameter", std::string("std_dev"));
  if (gp != "std_dev" && gp != "variance") throw error(errc::invalid_argument, "unknown gaussian_parameter " + gp);
  c.gaussian_parameter = gp == "std_dev" ? GaussianParameter::std_dev : GaussianParameter::variance;
  c.validate();
  return c;
}

nlohmann::json model_to_json(const Scm& model) {
  const FeatureSchema& schema = model.schema();
  auto nodes = nlohmann::json::array();
  for (std::size_t c = 0; c < model.size(); ++c) {
    const Mechanism& m = model.mechanism(c);
    nlohmann::json parents = nlohmann::json::array();
    for (std::size_t p : m.parents) parents.push_back(schema[p].name);
    nlohmann::json form;
    if (const auto* la = std::get_if<LearnedAdditive>(&m.form)) {
      form = {{"type", "learned_additive"},
              {"basis", basis_to_json(la->basis, schema)},
              {"weights", la->weights},
              {"intercept", la->intercept},
              {"residual_scale", la->residual_scale}};
    } else if (const auto* lt = std::get_if<LearnedThreshold>(&m.form)) {
      form = {{"type", "learned_threshold"},
              {"basis", basis_to_json(lt->basis, schema)},
              {"weights", lt->weights},
              {"intercept", lt->intercept},
              {"noise_scale", lt->noise_scale},
              {"threshold", lt->threshold}};
    } else {
      throw error(errc::invalid_argument, "closed-form mechanism for " + schema[c].name + " cannot be serialized");
    }
    nodes.push_back({{"column", schema[c].name}, {"parents", parents}, {"form", form}, {"noise", noise_to_json(model.noise(c))}});
  }
  return {{"spec_version", kReportVersion}, {"kind", "learned_scm"}, {"schema", schema_to_json(schema)}, {"nodes", nodes}};
}

nlohmann::json oracle_descriptor(const SynthConfig& config) {
  return {{"spec_version", kReportVersion}, {"kind", "synthetic_loan_oracle"}, {"config", synth_config_to_json(config)}};
}

Scm model_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "synthetic_loan_oracle") return build_oracle(synth_config_from_json(j.at("config")));
    if (kind != "learned_scm") throw error(errc::invalid_argument, "unknown model kind '" + kind + "'");
    FeatureSchema schema = schema_from_json(j.at("schema"));
    std::vector<Mechanism> mech;
    std::vector<NoiseSpec> noise;
    for (const auto& n : j.at("nodes")) {
      Mechanism m;
      m.node = schema.index_of(n.at("column").get<std::string>());
      for (const auto& p : n.at("parents")) m.parents.push_back(schema.index_of(p.get<std::string>()));
      const auto& f = n.at("form");
      const auto type = f.at("type").get<std::string>();
      if (type == "learned_additive") {
        m.form = LearnedAdditive{basis_from_json(f.at("basis"), schema), f.at("weights").get<std::vector<double>>(),
                                 f.at("intercept").get<double>(), f.at("residual_scale").get<double>()};
      } else if (type == "learned_threshold") {
        m.form = LearnedThreshold{basis_from_json(f.at("basis"), schema), f.at("weights").get<std::vector<double>>(),
                                  f.at("intercept").get<double>(), f.at("noise_scale").get<double>(),
                                  f.at("threshold").get<double>()};
      } else {
        throw error(errc::invalid_argument, "unknown mechanism type '" + type + "'");
      }
      mech.push_back(std::move(m));
      noise.push_back(noise_from_json(n.at("noise")));
    }
    return Scm(std::move(schema), std::move(mech), std::move(noise));
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::invalid_argument, std::string("malformed model document: ") + e.what());
  }
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io_failure, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw error(errc::io_failure, path + " is not valid JSON: " + e.what());
  }
}

Scm load_model(const std::string& path) { return model_from_json(load_json(path)); }

void save_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw error(errc::io_failure, "cannot write " + path);
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw error(errc::io_failure, "failed writing " + path);
}

}  // namespace treatfair
