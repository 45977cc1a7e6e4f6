#include "commands.hpp"

#include <treatfair/csv_io.hpp>
#include <treatfair/disparity.hpp>
#include <treatfair/error.hpp>
#include <treatfair/estimators.hpp>
#include <treatfair/mitigation.hpp>
#include <treatfair/model_io.hpp>
#include <treatfair/parallel.hpp>
#include <treatfair/predictors.hpp>
#include <treatfair/synth_loan.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>

namespace treatfair::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

#ifndef TREATFAIR_VERSION
#define TREATFAIR_VERSION "0.0.0"
#endif

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Tracks input files so every output can carry their digests.
class Provenance {
 public:
  Provenance(std::string command, std::uint64_t seed) : command_(std::move(command)), seed_(seed) {}
  void input(const std::string& path) {
    if (!path.empty()) inputs_.push_back({{"path", path}, {"fnv1a64", hex64(fnv1a_file(path))}});
  }
  json to_json() const {
    return {{"command", command_}, {"seed", seed_}, {"version", TREATFAIR_VERSION}, {"inputs", inputs_}};
  }

 private:
  std::string command_;
  std::uint64_t seed_;
  json inputs_ = json::array();
};

void emit(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  save_json(j, path);
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw error(errc::io_failure, "cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw error(errc::io_failure, "failed writing " + path);
}

std::string sibling(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw usage_error("cannot read " + what + " '" + text + "'");
  return v;
}

// Label or numeric code of a discrete column.
double parse_value(const FeatureSchema& schema, std::size_t col, const std::string& text) {
  if (auto code = schema.code_of(col, text)) return *code;
  return parse_number(text, schema[col].name + " value");
}

std::string value_label(const FeatureSchema& schema, std::size_t col, double v) {
  const auto& labels = schema[col].labels;
  const auto i = static_cast<std::size_t>(v);
  if (v >= 0 && static_cast<double>(i) == v && i < labels.size()) return labels[i];
  return format_double(v);
}

std::string default_sensitive(const FeatureSchema& schema, const std::string& requested) {
  if (!requested.empty()) {
    const auto col = schema.index_of(requested);
    if (schema[col].role != Role::sensitive) throw usage_error(requested + " is not a sensitive column");
    return requested;
  }
  return schema[schema.indices(Role::sensitive).front()].name;
}

struct Loaded {
  SchemaConfig config;
  Dataset data;
};

Loaded load_data(const std::string& data_path, const std::string& schema_path, Provenance& prov) {
  if (data_path.empty()) throw usage_error("--data is required");
  if (schema_path.empty()) throw usage_error("--schema is required");
  prov.input(data_path);
  prov.input(schema_path);
  auto config = SchemaConfig::load(schema_path);
  auto data = load_csv(data_path, config);
  return {std::move(config), std::move(data)};
}

// "oracle", "oracle:balanced", "oracle:unbalanced" or a model JSON path.
Scm resolve_model(const std::string& spec, const FeatureSchema& schema, Provenance& prov) {
  std::optional<Scm> model;
  if (spec == "oracle" || spec == "oracle:balanced") {
    model = build_oracle(SynthConfig::balanced());
  } else if (spec == "oracle:unbalanced") {
    model = build_oracle(SynthConfig::unbalanced());
  } else {
    prov.input(spec);
    model = load_model(spec);
  }
  if (!(model->schema() == schema)) throw error(errc::schema_mismatch, "model schema does not match the data schema");
  return std::move(*model);
}

json data_json(const Dataset& d) {
  return {{"rows", d.rows()}, {"dropped_rows", d.provenance().dropped_rows}};
}

DeltaKind delta_from(const std::string& s) {
  if (s == "difference" || s == "diff") return DeltaKind::difference;
  if (s == "abs" || s == "abs_difference") return DeltaKind::abs_difference;
  throw usage_error("unknown --delta '" + s + "'");
}

Statistic stat_from(const std::string& s) {
  if (s == "median") return Statistic::median;
  if (s == "mean") return Statistic::mean;
  throw usage_error("unknown --stats '" + s + "'");
}

Aggregator aggregator_from(const std::string& s) {
  if (s == "none") return Aggregator::none;
  if (s == "avg") return Aggregator::avg;
  if (s == "max") return Aggregator::max;
  if (s == "var") return Aggregator::var;
  throw usage_error("unknown --multi '" + s + "'");
}

OutcomeAggregator outcome_aggregator_from(const std::string& s) {
  if (s == "worst_case" || s == "worst") return OutcomeAggregator::worst_case;
  if (s == "mean") return OutcomeAggregator::mean;
  if (s == "variance" || s == "var") return OutcomeAggregator::variance;
  throw usage_error("unknown --outcome-aggregator '" + s + "'");
}

std::string multi_csv(const MultiReport& r, const std::string& agg) {
  std::string out = "metric,treatment,label,statistic,value,rows\n";
  for (std::size_t i = 0; i < r.treatments.size(); ++i)
    out += "disparity," + r.treatments[i] + ",," + agg + "," + format_double(r.disparity[i]) + "," +
           std::to_string(r.rows) + "\n";
  for (int y = 0; y < 2; ++y)
    out += "effect,," + std::to_string(y) + ",percent," + format_double(r.effect_percent[y]) + "," +
           std::to_string(r.label_rows[y]) + "\n";
  return out;
}

struct ParsedPolicy {
  TreatmentPolicy policy;
  std::string tag;
};

ParsedPolicy parse_policy(const std::string& text, const FeatureSchema& schema, const std::string& scol,
                          const RiskOptions& o) {
  ParsedPolicy p;
  p.policy.sensitive_column = scol;
  p.policy.seed = o.seed;
  p.policy.sample_count = o.samples;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  const auto col = schema.index_of(scol);
  if (kind == "factual" && arg.empty()) {
    p.policy.kind = PolicyKind::factual;
    p.tag = "factual";
  } else if (kind == "conditional" && arg == "own") {
    p.policy.kind = PolicyKind::own_group_conditional;
    p.tag = "conditional-own";
  } else if ((kind == "conditional" || kind == "counterfactual") && !arg.empty()) {
    p.policy.kind = kind == "conditional" ? PolicyKind::empirical_conditional : PolicyKind::sensitive_counterfactual;
    p.policy.group = parse_value(schema, col, arg);
    p.tag = kind + "-" + value_label(schema, col, p.policy.group);
  } else {
    throw usage_error("unknown policy '" + text + "' (factual | conditional:<v> | conditional:own | counterfactual:<v>)");
  }
  return p;
}

}  // namespace

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(errc::io_failure, "cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

int run_simulate(const SimulateOptions& o, std::size_t threads) {
  if (o.out.empty()) throw usage_error("--out is required");
  SynthConfig config;
  config.beta = o.beta;
  config.gamma = o.gamma;
  config.delta = o.delta;
  config.eta = o.eta;
  config.n = o.n;
  config.seed = o.seed;
  if (o.variant == "auto")
    config.outcome_variant = o.delta == 1.0 ? OutcomeVariant::noisy_threshold : OutcomeVariant::deterministic_threshold;
  else
    config.outcome_variant = outcome_variant_from_string(o.variant);
  if (o.gaussian_parameter == "std_dev")
    config.gaussian_parameter = GaussianParameter::std_dev;
  else if (o.gaussian_parameter == "variance")
    config.gaussian_parameter = GaussianParameter::variance;
  else
    throw usage_error("unknown --gaussian-parameter '" + o.gaussian_parameter + "'");
  config.validate();

  const Dataset data = generate(config, resolve_threads(threads));
  save_csv(data, o.out);
  const std::string schema_out = o.schema_out.empty() ? sibling(o.out, ".schema.json") : o.schema_out;
  const std::string oracle_out = o.oracle_out.empty() ? sibling(o.out, ".oracle.json") : o.oracle_out;
  SchemaConfig::from_schema(data.schema()).save(schema_out);

  Provenance prov("simulate", o.seed);
  json oracle = oracle_descriptor(config);
  json outputs = {{"data", o.out}, {"data_fnv1a64", hex64(fnv1a_file(o.out))}, {"schema", schema_out}};
  oracle["provenance"] = prov.to_json();
  oracle["provenance"]["outputs"] = outputs;
  save_json(oracle, oracle_out);
  return 0;
}

int run_fit(const FitOptions& o, std::size_t threads) {
  if (o.out.empty()) throw usage_error("--out is required");
  if (o.split.size() != 3) throw usage_error("--split takes three fractions");
  Provenance prov("fit", o.seed);
  auto [config, data] = load_data(o.data, o.schema, prov);

  EstimatorConfig ec;
  ec.basis = basis_from_string(o.basis);
  ec.regularization = o.regularization;
  ec.train_split = {o.split[0], o.split[1], o.split[2]};
  ec.seed = o.seed;
  ec.threads = resolve_threads(threads);
  ec.validate();
  const Scm model = fit(data, data.schema(), ec);

  json doc = model_to_json(model);
  doc["provenance"] = prov.to_json();
  doc["provenance"]["estimator"] = {{"basis", std::string(to_string(ec.basis))},
                                    {"regularization", ec.regularization},
                                    {"train_split", o.split}};
  save_json(doc, o.out);

  const DataSplit parts = split(data, ec.train_split, ec.seed);
  json report = {{"spec_version", kReportVersion}, {"nodes", json::array()}};
  if (parts.validation.rows() > 0) {
    const GoodnessReport g = goodness(model, parts.validation, ec.threads);
    for (const auto& n : g.nodes)
      report["nodes"].push_back({{"column", n.column},
                                 {"n", n.n},
                                 {"log_likelihood", n.log_likelihood},
                                 {"mean_log_likelihood", n.mean_log_likelihood},
                                 {"residual_mean", n.residual_mean},
                                 {"residual_variance", n.residual_variance},
                                 {"standard_error", n.standard_error}});
    report["total_log_likelihood"] = g.total_log_likelihood;
  }
  report["split_rows"] = {parts.train.rows(), parts.validation.rows(), parts.test.rows()};
  report["provenance"] = prov.to_json();
  emit(report, o.report);
  return 0;
}

int run_audit(const AuditOptions& o, std::size_t threads) {
  Provenance prov("audit", 0);
  auto [config, data] = load_data(o.data, o.schema, prov);
  const FeatureSchema& schema = data.schema();
  const Scm model = resolve_model(o.model, schema, prov);
  const std::string scol = default_sensitive(schema, o.sensitive);
  const auto sidx = schema.index_of(scol);

  json doc;
  std::string csv;
  if (!o.multi.empty()) {
    if (!o.predictor.empty()) throw usage_error("--predictor cannot be combined with --multi");
    MultiConfig mc;
    mc.sensitive_columns = o.multi_columns.empty() ? std::vector<std::string>{scol} : o.multi_columns;
    mc.values.resize(mc.sensitive_columns.size());
    mc.aggregator = aggregator_from(o.multi);
    mc.outcome_aggregator = outcome_aggregator_from(o.outcome_aggregator);
    if (o.flip == "single") mc.flip = FlipStrategy::single;
    else if (o.flip == "joint") mc.flip = FlipStrategy::joint;
    else throw usage_error("unknown --flip '" + o.flip + "'");
    if (o.path == "total") mc.path = PathKind::total;
    else if (o.path == "direct") mc.path = PathKind::direct;
    else throw usage_error("unknown --path '" + o.path + "'");
    mc.corrected = o.corrected;
    mc.threads = resolve_threads(threads);
    if (!o.group_pair.empty()) {
      if (mc.sensitive_columns.size() != 1 || o.group_pair.size() != 2)
        throw usage_error("--group-pair with --multi needs exactly one sensitive column");
      mc.factual = {parse_value(schema, sidx, o.group_pair[0])};
      mc.values[0] = {parse_value(schema, sidx, o.group_pair[0]), parse_value(schema, sidx, o.group_pair[1])};
    }
    const MultiReport report = audit_multi(data, model, mc);
    doc = to_json(report);
    doc["aggregator"] = o.multi;
    doc["outcome_aggregator"] = o.outcome_aggregator;
    doc["sensitive_columns"] = mc.sensitive_columns;
    csv = multi_csv(report, o.multi);
  } else {
    DisparityConfig dc;
    dc.sensitive_column = scol;
    if (o.group_pair.empty() && schema[sidx].type.kind == Kind::binary) {
      // binary column: first code is factual
      dc.factual_value = 0.0;
      dc.counterfactual_value = 1.0;
    } else {
      if (o.group_pair.size() != 2) throw usage_error("--group-pair takes two values");
      dc.factual_value = parse_value(schema, sidx, o.group_pair[0]);
      dc.counterfactual_value = parse_value(schema, sidx, o.group_pair[1]);
    }
    dc.delta = delta_from(o.delta);
    dc.statistic = stat_from(o.stats);
    dc.threads = resolve_threads(threads);
    DisparityReport report;
    if (o.predictor.empty()) {
      report = audit(data, model, dc);
    } else {
      prov.input(o.predictor);
      const PredictorModel pred = predictor_from_json(load_json(o.predictor), schema);
      report = audit_under_policy(data, model, pred, dc);
    }
    doc = to_json(report, schema);
    if (!o.predictor.empty()) doc["predictor"] = o.predictor;
    csv = to_csv(report);
  }
  doc["data"] = data_json(data);
  doc["model"] = o.model;
  doc["provenance"] = prov.to_json();
  if (o.out.empty()) {
    emit(doc, "");
  } else {
    save_json(doc, o.out + ".json");
    write_text(csv, o.out + ".csv");
  }
  return 0;
}

int run_mitigate(const MitigateOptions& o, std::size_t threads) {
  if (o.out.empty()) throw usage_error("--out is required");
  Provenance prov("mitigate", 0);
  auto [config, data] = load_data(o.data, o.schema, prov);
  const FeatureSchema& schema = data.schema();
  const Scm model = resolve_model(o.model, schema, prov);
  const std::string scol = default_sensitive(schema, o.sensitive);
  const auto sidx = schema.index_of(scol);
  if (o.disadvantaged.empty() || o.advantaged.empty()) throw usage_error("--disadvantaged and --advantaged are required");
  const double dis = parse_value(schema, sidx, o.disadvantaged);
  const double adv = parse_value(schema, sidx, o.advantaged);

  const FairDataset fair = build_fair_dataset(data, model, scol, dis, adv, resolve_threads(threads));
  save_csv(fair.data, o.out);
  json report = {{"spec_version", kReportVersion},
                 {"output", o.out},
                 {"output_fnv1a64", hex64(fnv1a_file(o.out))},
                 {"sensitive_column", scol},
                 {"disadvantaged", value_label(schema, sidx, dis)},
                 {"advantaged", value_label(schema, sidx, adv)},
                 {"rows", fair.data.rows()},
                 {"intervened_rows", fair.intervened_rows},
                 {"factual_rate", fair.factual_rate},
                 {"fair_rate", fair.fair_rate},
                 {"non_harm", fair.non_harm},
                 {"model", o.model},
                 {"provenance", prov.to_json()}};
  emit(report, o.report);
  return 0;
}

int run_risk(const RiskOptions& o, std::size_t threads) {
  if (o.policies.empty()) throw usage_error("at least one --policy is required");
  Provenance prov("risk", o.seed);
  auto [config, data] = load_data(o.data, o.schema, prov);
  const FeatureSchema& schema = data.schema();
  const Scm model = resolve_model(o.model, schema, prov);
  const std::string scol = default_sensitive(schema, o.sensitive);
  const auto sidx = schema.index_of(scol);
  fs::create_directories(o.out_dir);

  std::set<double> groups(data.column(sidx).begin(), data.column(sidx).end());
  if (groups.empty()) throw error(errc::empty_group, "no rows to score");
  json summary = {{"spec_version", kReportVersion}, {"sensitive_column", scol}, {"policies", json::array()}};
  std::set<std::string> seen;
  for (const auto& text : o.policies) {
    const ParsedPolicy p = parse_policy(text, schema, scol, o);
    if (!seen.insert(p.tag).second) throw usage_error("policy '" + text + "' given twice");
    const ResolvedPolicy resolved(model, data, p.policy);
    const std::vector<double> scores = fair_risk_scores(data, model, resolved, resolve_threads(threads));

    std::map<double, std::vector<double>> by_group;
    for (std::size_t r = 0; r < data.rows(); ++r) by_group[data.at(r, sidx)].push_back(scores[r]);
    json entry = {{"policy", text}, {"tag", p.tag}, {"groups", json::object()}};
    for (const auto& [g, s] : by_group) {
      const std::string label = value_label(schema, sidx, g);
      const std::string file = (fs::path(o.out_dir) / ("risk_" + p.tag + "_" + label + ".csv")).string();
      std::string csv = "threshold,cdf\n";
      for (const auto& [t, c] : risk_cdf(s)) csv += format_double(t) + "," + format_double(c) + "\n";
      write_text(csv, file);
      double mean = 0.0;
      for (double v : s) mean += v;
      entry["groups"][label] = {{"rows", s.size()}, {"mean_risk", mean / static_cast<double>(s.size())}, {"cdf", file}};
    }
    if (by_group.size() == 2)
      entry["kolmogorov_distance"] = kolmogorov_distance(by_group.begin()->second, by_group.rbegin()->second);
    summary["policies"].push_back(entry);
  }
  summary["samples"] = o.samples;
  summary["model"] = o.model;
  summary["provenance"] = prov.to_json();
  save_json(summary, (fs::path(o.out_dir) / "risk_summary.json").string());
  return 0;
}

int run_losses(const LossesOptions& o, std::size_t) {
  if (o.amount.empty() || o.group.empty()) throw usage_error("--amount and --group are required");
  Provenance prov("losses", 0);
  auto [config, data] = load_data(o.data, o.schema, prov);
  EsiFormula formula;
  if (o.formula == "rate") {
    if (o.duration.empty()) throw usage_error("--duration is required for the rate formula");
    formula = RateDuration{o.rate, o.duration};
  } else if (o.formula == "annuity") {
    if (o.annuity.empty()) throw usage_error("--annuity is required for the annuity formula");
    formula = AnnuityAmount{o.annuity, o.years};
  } else {
    throw usage_error("unknown --formula '" + o.formula + "'");
  }
  const LossReport report = losses(data, formula, o.amount, o.group, o.tag);
  const FeatureSchema& schema = data.schema();
  const auto gidx = schema.index_of(o.group);
  json groups = json::object();
  for (const auto& [g, l] : report.groups)
    groups[value_label(schema, gidx, g)] = {{"value", g}, {"rows", l.rows}, {"lgd", l.lgd}, {"esi", l.esi}};
  json doc = {{"spec_version", kReportVersion},
              {"tag", report.tag},
              {"amount_column", o.amount},
              {"group_column", o.group},
              {"formula", o.formula},
              {"groups", groups},
              {"data", data_json(data)},
              {"provenance", prov.to_json()}};
  emit(doc, o.out);
  return 0;
}

int run_predict(const PredictOptions& o, std::size_t) {
  if (o.out.empty()) throw usage_error("--out is required");
  Provenance prov("predict", o.seed);
  auto [config, data] = load_data(o.data, o.schema, prov);
  const FeatureSchema& schema = data.schema();
  const std::string scol = default_sensitive(schema, o.sensitive);
  const FairnessCriterion criterion = criterion_from_string(o.criterion);

  PredictorModel model = train(data, schema, scol, o.seed, o.train_fraction);
  model = postprocess(std::move(model), data, criterion);
  json doc = to_json(model);
  doc["provenance"] = prov.to_json();
  save_json(doc, o.out);

  json metrics = {{"spec_version", kReportVersion},
                  {"criterion", std::string(to_string(criterion))},
                  {"feasible", model.feasible},
                  {"train", to_json(evaluate(model, data, model.train_rows))},
                  {"test", to_json(evaluate(model, data, model.test_rows))},
                  {"provenance", prov.to_json()}};
  emit(metrics, o.metrics);
  return 0;
}

}  // namespace treatfair::cli
