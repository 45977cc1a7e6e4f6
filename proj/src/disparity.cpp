#include "treatfair/disparity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "treatfair/error.hpp"
#include "treatfair/parallel.hpp"

namespace treatfair {
namespace {

struct RowResult {
  std::vector<double> z_f, z_scf, z_spcf;
  double y_f = 0.0, y_ttd = 0.0, y_dtd = 0.0;
};

struct Needs {
  bool total = true;
  bool direct = true;
  bool outcome = true;
};

std::vector<std::size_t> audited_rows(const Dataset& data, std::size_t scol, double value) {
  std::vector<std::size_t> rows;
  const auto col = data.column(scol);
  for (std::size_t r = 0; r < data.rows(); ++r)
    if (col[r] == value) rows.push_back(r);
  return rows;
}

std::vector<double> treatment_values(const FeatureSchema& schema, std::span<const double> inst) {
  std::vector<double> z;
  for (std::size_t c : schema.indices(Role::treatment)) z.push_back(inst[c]);
  return z;
}

double delta(const Column& col, DeltaKind kind, double cf, double f) {
  if (col.type.kind == Kind::categorical) return cf != f ? 100.0 : 0.0;
  const double d = cf - f;
  return kind == DeltaKind::abs_difference ? std::abs(d) : d;
}

std::vector<RowResult> evaluate_rows(const Dataset& data, const Scm& model, const DisparityConfig& config,
                                     const std::vector<std::size_t>& rows, Needs needs) {
  const FeatureSchema& schema = model.schema();
  const std::size_t scol = schema.index_of(config.sensitive_column);
  const std::size_t ycol = schema.outcome();
  std::vector<RowResult> out(rows.size());
  parallel_for(rows.size(), config.threads, [&](std::size_t i) {
    const auto inst = data.row(rows[i]);
    RowResult& r = out[i];
    r.z_f = treatment_values(schema, inst);
    r.y_f = inst[ycol];
    if (needs.total) {
      const Instance cf = counterfactual(model, inst, {{scol, config.counterfactual_value}});
      r.z_scf = treatment_values(schema, cf);
      if (needs.outcome) r.y_ttd = downstream_outcome(model, inst, r.z_scf);
    }
    if (needs.direct) {
      const Instance pcf = path_specific_counterfactual(
          model, inst, direct_path_plan(model, inst, scol, config.counterfactual_value));
      r.z_spcf = treatment_values(schema, pcf);
      if (needs.outcome) r.y_dtd = downstream_outcome(model, inst, r.z_spcf);
    }
  });
  return out;
}

std::vector<TreatmentDisparity> summarize(const FeatureSchema& schema, const DisparityConfig& config,
                                          const std::vector<RowResult>& rows, bool direct) {
  std::vector<TreatmentDisparity> out;
  const auto tcols = schema.indices(Role::treatment);
  for (std::size_t j = 0; j < tcols.size(); ++j) {
    const Column& col = schema[tcols[j]];
    std::vector<double> d(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      d[i] = delta(col, config.delta, direct ? rows[i].z_spcf[j] : rows[i].z_scf[j], rows[i].z_f[j]);
    TreatmentDisparity t;
    t.column = col.name;
    t.flip_rate = col.type.kind == Kind::categorical;
    t.mean = d.empty() ? 0.0 : std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
    t.median = t.flip_rate ? t.mean : median(d);
    out.push_back(t);
  }
  return out;
}

std::array<LabelEffect, 2> effects(const std::vector<RowResult>& rows, bool direct) {
  std::array<LabelEffect, 2> out{};
  for (const auto& r : rows) {
    auto& e = out[r.y_f == 1.0 ? 1 : 0];
    ++e.rows;
    if ((direct ? r.y_dtd : r.y_ttd) != r.y_f) ++e.flips;
  }
  for (auto& e : out) e.percent = e.rows ? 100.0 * static_cast<double>(e.flips) / static_cast<double>(e.rows) : 0.0;
  return out;
}

std::vector<std::size_t> checked_rows(const Dataset& data, const Scm& model, const DisparityConfig& config) {
  if (!(data.schema() == model.schema())) throw error(errc::schema_mismatch, "dataset and model schemas differ");
  config.validate(model.schema());
  auto rows = audited_rows(data, model.schema().index_of(config.sensitive_column), config.factual_value);
  if (rows.empty())
    throw error(errc::empty_group, "no rows with " + config.sensitive_column + " = " + std::to_string(config.factual_value));
  return rows;
}

std::vector<double> pick(const std::vector<TreatmentDisparity>& t, Statistic s) {
  std::vector<double> out;
  for (const auto& x : t) out.push_back(x.value(s));
  return out;
}

std::array<double, 2> percents(const std::array<LabelEffect, 2>& e) { return {e[0].percent, e[1].percent}; }

}  // namespace

void DisparityConfig::validate(const FeatureSchema& schema) const {
  const std::size_t c = schema.index_of(sensitive_column);
  if (schema[c].role != Role::sensitive) throw error(errc::invalid_argument, sensitive_column + " is not sensitive");
  if (factual_value == counterfactual_value)
    throw error(errc::invalid_argument, "factual and counterfactual group must differ");
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
  return 0.5 * (lo + hi);
}

std::vector<double> ttd(const Dataset& data, const Scm& model, const DisparityConfig& config) {
  const auto rows = evaluate_rows(data, model, config, checked_rows(data, model, config), {true, false, false});
  return pick(summarize(model.schema(), config, rows, false), config.statistic);
}

std::vector<double> dtd(const Dataset& data, const Scm& model, const DisparityConfig& config) {
  const auto rows = evaluate_rows(data, model, config, checked_rows(data, model, config), {false, true, false});
  return pick(summarize(model.schema(), config, rows, true), config.statistic);
}

std::array<double, 2> ttd_e(const Dataset& data, const Scm& model, const DisparityConfig& config) {
  const auto rows = evaluate_rows(data, model, config, checked_rows(data, model, config), {true, false, true});
  return percents(effects(rows, false));
}

std::array<double, 2> dtd_e(const Dataset& data, const Scm& model, const DisparityConfig& config) {
  const auto rows = evaluate_rows(data, model, config, checked_rows(data, model, config), {false, true, true});
  return percents(effects(rows, true));
}

DisparityReport audit(const Dataset& data, const Scm& model, const DisparityConfig& config) {
  const auto idx = checked_rows(data, model, config);
  const auto rows = evaluate_rows(data, model, config, idx, {});
  DisparityReport rep;
  rep.config = config;
  rep.audited_rows = idx.size();
  for (double v : data.column(config.sensitive_column)) ++rep.group_counts[v];
  rep.ttd = summarize(model.schema(), config, rows, false);
  rep.dtd = summarize(model.schema(), config, rows, true);
  rep.ttd_e = effects(rows, false);
  rep.dtd_e = effects(rows, true);
  return rep;
}

double aggregate(Aggregator a, std::span<const double> deltas, bool corrected) {
  const double m = static_cast<double>(deltas.size());
  if (deltas.empty()) return 0.0;
  // printed normalizer (|S|-1)|S|/2 with |S| = m + 1
  const double norm = corrected ? m : m * (m + 1.0) / 2.0;
  switch (a) {
    case Aggregator::avg: {
      double s = 0.0;
      for (double d : deltas) s += std::abs(d);
      return s / norm;
    }
    case Aggregator::max: {
      double best = 0.0;
      for (double d : deltas) best = std::max(best, std::abs(d));
      return best;
    }
    case Aggregator::var: {
      double s = 0.0;
      for (double d : deltas) s += d * d;
      return s / norm;
    }
    case Aggregator::none:
      break;
  }
  throw error(errc::invalid_argument, "aggregator must not be none");
}

double aggregate_outcome(OutcomeAggregator a, std::span<const double> flips, std::size_t worst) {
  if (flips.empty()) return 0.0;
  const double m = static_cast<double>(flips.size());
  const double mean = std::accumulate(flips.begin(), flips.end(), 0.0) / m;
  switch (a) {
    case OutcomeAggregator::worst_case:
      return flips[worst];
    case OutcomeAggregator::mean:
      return mean;
    case OutcomeAggregator::variance: {
      double s = 0.0;
      for (double f : flips) s += (f - mean) * (f - mean);
      return s / m;
    }
  }
  return 0.0;
}

MultiReport audit_multi(const Dataset& data, const Scm& model, const MultiConfig& config) {
  const FeatureSchema& schema = model.schema();
  if (!(data.schema() == schema)) throw error(errc::schema_mismatch, "dataset and model schemas differ");
  if (config.aggregator == Aggregator::none) throw error(errc::invalid_argument, "an aggregator is required");
  if (config.sensitive_columns.empty()) throw error(errc::invalid_argument, "no sensitive columns given");
  const std::size_t k = config.sensitive_columns.size();
  std::vector<std::size_t> scols;
  std::vector<std::vector<double>> sets;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t c = schema.index_of(config.sensitive_columns[i]);
    if (schema[c].role != Role::sensitive) throw error(errc::invalid_argument, schema[c].name + " is not sensitive");
    const auto col = data.column(c);
    std::set<double> support(col.begin(), col.end());
    std::vector<double> vals = i < config.values.size() ? config.values[i] : std::vector<double>{};
    if (vals.empty()) vals.assign(support.begin(), support.end());
    for (double v : vals)
      if (!support.count(v))
        throw error(errc::unknown_value, std::to_string(v) + " is not an observed value of " + schema[c].name);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    scols.push_back(c);
    sets.push_back(std::move(vals));
  }
  if (!config.factual.empty() && config.factual.size() != k)
    throw error(errc::invalid_argument, "factual group needs one value per sensitive column");

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    bool keep = true;
    for (std::size_t i = 0; i < config.factual.size(); ++i) keep = keep && data.at(r, scols[i]) == config.factual[i];
    if (keep) rows.push_back(r);
  }
  if (rows.empty()) throw error(errc::empty_group, "no rows in the requested factual group");

  // counterfactual assignments for a row with factual sensitive values sf
  auto targets = [&](std::span<const double> sf) {
    std::vector<DoSet> out;
    if (config.flip == FlipStrategy::single) {
      for (std::size_t i = 0; i < k; ++i)
        for (double v : sets[i])
          if (v != sf[i]) out.push_back({{scols[i], v}});
    } else {
      std::vector<std::size_t> pos(k, 0);
      for (;;) {
        DoSet s;
        bool same = true;
        for (std::size_t i = 0; i < k; ++i) {
          s.push_back({scols[i], sets[i][pos[i]]});
          same = same && sets[i][pos[i]] == sf[i];
        }
        if (!same) out.push_back(std::move(s));
        std::size_t i = 0;
        while (i < k && ++pos[i] == sets[i].size()) pos[i++] = 0;
        if (i == k) break;
      }
    }
    return out;
  };

  const auto tcols = schema.indices(Role::treatment);
  const std::size_t ycol = schema.outcome();
  struct Row {
    std::vector<double> agg;
    double effect = 0.0;
    double y = 0.0;
    std::size_t m = 0;
  };
  std::vector<Row> results(rows.size());
  parallel_for(rows.size(), config.threads, [&](std::size_t i) {
    const auto inst = data.row(rows[i]);
    std::vector<double> sf;
    for (std::size_t c : scols) sf.push_back(inst[c]);
    const auto cfs = targets(sf);
    const ExogenousVector u = abduct(model, inst);
    std::vector<std::vector<double>> deltas(tcols.size());
    std::vector<double> flips, size;
    for (const DoSet& s : cfs) {
      Instance cf;
      if (config.path == PathKind::total) {
        cf = predict(model, u, s);
      } else {
        InterventionPlan plan;
        plan.stages.push_back(s);
        plan.stages.push_back(pin_block(schema, Role::covariate, inst));
        cf = path_specific_counterfactual(model, inst, plan);
      }
      double l1 = 0.0;
      std::vector<double> z;
      for (std::size_t j = 0; j < tcols.size(); ++j) {
        const double d = delta(schema[tcols[j]], DeltaKind::difference, cf[tcols[j]], inst[tcols[j]]);
        deltas[j].push_back(schema[tcols[j]].type.kind == Kind::categorical ? d / 100.0 : d);
        l1 += std::abs(deltas[j].back());
        z.push_back(cf[tcols[j]]);
      }
      size.push_back(l1);
      flips.push_back(downstream_outcome(model, inst, z) != inst[ycol] ? 1.0 : 0.0);
    }
    Row& out = results[i];
    out.m = cfs.size();
    out.y = inst[ycol];
    for (auto& d : deltas) out.agg.push_back(aggregate(config.aggregator, d, config.corrected));
    const std::size_t worst =
        size.empty() ? 0 : static_cast<std::size_t>(std::max_element(size.begin(), size.end()) - size.begin());
    out.effect = aggregate_outcome(config.outcome_aggregator, flips, worst);
  });

  MultiReport rep;
  for (std::size_t c : tcols) rep.treatments.push_back(schema[c].name);
  rep.disparity.assign(tcols.size(), 0.0);
  rep.rows = rows.size();
  std::array<double, 2> sums{};
  for (const auto& r : results) {
    for (std::size_t j = 0; j < tcols.size(); ++j) rep.disparity[j] += r.agg[j];
    const int label = r.y == 1.0 ? 1 : 0;
    ++rep.label_rows[label];
    sums[label] += r.effect;
    rep.counterfactuals_per_row = std::max(rep.counterfactuals_per_row, r.m);
  }
  for (double& d : rep.disparity) d /= static_cast<double>(rows.size());
  for (int l = 0; l < 2; ++l)
    rep.effect_percent[l] = rep.label_rows[l] ? 100.0 * sums[l] / static_cast<double>(rep.label_rows[l]) : 0.0;
  return rep;
}

std::vector<double> ttd_multi(const Dataset& data, const Scm& model, const MultiConfig& config) {
  return audit_multi(data, model, config).disparity;
}

std::array<double, 2> ttd_e_multi(const Dataset& data, const Scm& model, const MultiConfig& config) {
  return audit_multi(data, model, config).effect_percent;
}

namespace {

nlohmann::json treatment_json(const std::vector<TreatmentDisparity>& t) {
  auto out = nlohmann::json::object();
  for (const auto& x : t)
    out[x.column] = {{"mean", x.mean}, {"median", x.median}, {"kind", x.flip_rate ? "flip_rate_percent" : "delta"}};
  return out;
}

nlohmann::json effect_json(const std::array<LabelEffect, 2>& e) {
  auto out = nlohmann::json::object();
  for (int l = 0; l < 2; ++l)
    out["y" + std::to_string(l)] = {{"percent", e[l].percent}, {"flips", e[l].flips}, {"rows", e[l].rows}};
  return out;
}

std::string label_of(const FeatureSchema& schema, const std::string& col, double v) {
  const Column& c = schema[schema.index_of(col)];
  const auto i = static_cast<std::size_t>(v);
  if (c.type.discrete() && v >= 0 && i < c.labels.size() && static_cast<double>(i) == v) return c.labels[i];
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

nlohmann::json to_json(const DisparityReport& report, const FeatureSchema& schema) {
  const auto& c = report.config;
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [v, n] : report.group_counts) groups[label_of(schema, c.sensitive_column, v)] = n;
  return {
      {"spec_version", kReportVersion},
      {"config",
       {{"sensitive_column", c.sensitive_column},
        {"factual", label_of(schema, c.sensitive_column, c.factual_value)},
        {"counterfactual", label_of(schema, c.sensitive_column, c.counterfactual_value)},
        {"delta", c.delta == DeltaKind::difference ? "difference" : "abs_difference"},
        {"statistic", c.statistic == Statistic::mean ? "mean" : "median"}}},
      {"audited_rows", report.audited_rows},
      {"group_counts", groups},
      {"ttd", treatment_json(report.ttd)},
      {"dtd", treatment_json(report.dtd)},
      {"ttd_e", effect_json(report.ttd_e)},
      {"dtd_e", effect_json(report.dtd_e)},
  };
}

nlohmann::json to_json(const MultiReport& report) {
  nlohmann::json disp = nlohmann::json::object();
  for (std::size_t j = 0; j < report.treatments.size(); ++j) disp[report.treatments[j]] = report.disparity[j];
  return {{"spec_version", kReportVersion},
          {"rows", report.rows},
          {"counterfactuals_per_row", report.counterfactuals_per_row},
          {"disparity", disp},
          {"effect_percent", {{"y0", report.effect_percent[0]}, {"y1", report.effect_percent[1]}}},
          {"label_rows", {{"y0", report.label_rows[0]}, {"y1", report.label_rows[1]}}}};
}

std::string to_csv(const DisparityReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "metric,treatment,label,statistic,value,rows\n";
  auto treat = [&](const char* metric, const std::vector<TreatmentDisparity>& t) {
    for (const auto& x : t) {
      out << metric << ',' << x.column << ",,mean," << x.mean << ',' << report.audited_rows << '\n';
      out << metric << ',' << x.column << ",,median," << x.median << ',' << report.audited_rows << '\n';
    }
  };
  auto eff = [&](const char* metric, const std::array<LabelEffect, 2>& e) {
    char buf[32];
    for (int l = 0; l < 2; ++l) {
      std::snprintf(buf, sizeof buf, "%.2f", e[l].percent);
      out << metric << ",," << l << ",percent," << buf << ',' << e[l].rows << '\n';
    }
  };
  treat("TTD", report.ttd);
  treat("DTD", report.dtd);
  eff("TTD-E", report.ttd_e);
  eff("DTD-E", report.dtd_e);
  return out.str();
}

}  // namespace treatfair
