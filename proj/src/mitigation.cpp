#include "treatfair/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "treatfair/error.hpp"
#include "treatfair/parallel.hpp"

namespace treatfair {
namespace {

std::vector<double> treatments_of(const FeatureSchema& schema, std::span<const double> row) {
  std::vector<double> z;
  for (std::size_t c : schema.indices(Role::treatment)) z.push_back(row[c]);
  return z;
}

double van_der_corput(std::uint64_t i) {
  double x = 0.0, f = 0.5;
  for (; i; i >>= 1, f *= 0.5)
    if (i & 1) x += f;
  return x;
}

std::size_t column_of(const Dataset& data, const std::string& name) {
  const auto c = data.schema().find(name);
  if (!c) throw error(errc::missing_column, "column '" + name + "' not in dataset");
  return *c;
}

template <class Fn>
std::map<double, double> group_mean(const Dataset& data, const std::string& group_column, Fn&& term) {
  const std::size_t g = column_of(data, group_column);
  std::map<double, std::pair<double, std::size_t>> acc;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    auto& a = acc[data.at(r, g)];
    a.first += term(r);
    ++a.second;
  }
  std::map<double, double> out;
  for (const auto& [k, v] : acc) out[k] = v.first / static_cast<double>(v.second);
  return out;
}

}  // namespace

FairDataset build_fair_dataset(const Dataset& data, const Scm& model, const std::string& sensitive_column,
                               double disadvantaged, double advantaged, std::size_t threads) {
  if (!(data.schema() == model.schema())) throw error(errc::schema_mismatch, "dataset and model schemas differ");
  const FeatureSchema& schema = model.schema();
  const std::size_t scol = schema.index_of(sensitive_column);
  if (schema[scol].role != Role::sensitive) throw error(errc::invalid_argument, sensitive_column + " is not sensitive");
  if (disadvantaged == advantaged) throw error(errc::invalid_argument, "groups must differ");
  std::vector<std::size_t> rows;
  std::size_t advantaged_rows = 0;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    if (data.at(r, scol) == disadvantaged) rows.push_back(r);
    if (data.at(r, scol) == advantaged) ++advantaged_rows;
  }
  if (rows.empty() || advantaged_rows == 0) throw error(errc::empty_group, "both groups must be non-empty");

  const auto tcols = schema.indices(Role::treatment);
  const std::size_t ycol = schema.outcome();
  std::vector<std::vector<double>> replaced(rows.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    auto row = data.row(rows[i]);
    const Instance cf = counterfactual(model, row, {{scol, advantaged}});
    const auto z = treatments_of(schema, cf);
    const double y = downstream_outcome(model, row, z);
    for (std::size_t j = 0; j < tcols.size(); ++j) row[tcols[j]] = z[j];
    row[ycol] = y;
    replaced[i] = std::move(row);
  });

  FairDataset out{data};
  double before = 0.0, after = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    before += data.at(rows[i], ycol);
    after += replaced[i][ycol];
    out.data.set_row(rows[i], replaced[i]);
  }
  out.intervened_rows = rows.size();
  out.factual_rate = before / static_cast<double>(rows.size());
  out.fair_rate = after / static_cast<double>(rows.size());
  out.non_harm = out.fair_rate >= out.factual_rate;
  out.data.provenance().history.push_back("fair:" + sensitive_column);
  return out;
}

ResolvedPolicy::ResolvedPolicy(const Scm& model, const Dataset& reference, TreatmentPolicy policy)
    : model_(&model), policy_(std::move(policy)) {
  if (policy_.sample_count < 1) throw error(errc::invalid_argument, "sample_count must be >= 1");
  if (policy_.kind == PolicyKind::factual) return;
  scol_ = model.schema().index_of(policy_.sensitive_column);
  if (model.schema()[scol_].role != Role::sensitive)
    throw error(errc::invalid_argument, policy_.sensitive_column + " is not sensitive");
  if (policy_.kind == PolicyKind::sensitive_counterfactual) return;
  if (!(reference.schema() == model.schema())) throw error(errc::schema_mismatch, "reference data uses another schema");
  for (std::size_t r = 0; r < reference.rows(); ++r)
    pools_[reference.at(r, scol_)].push_back(treatments_of(reference.schema(), reference.row(r)));
  for (auto& [g, pool] : pools_) std::sort(pool.begin(), pool.end());
  if (policy_.kind == PolicyKind::empirical_conditional && !pools_.count(policy_.group))
    throw error(errc::empty_policy, "no reference rows for the policy group");
}

std::vector<std::vector<double>> ResolvedPolicy::draws(std::span<const double> row, std::size_t row_index) const {
  const FeatureSchema& schema = model_->schema();
  switch (policy_.kind) {
    case PolicyKind::factual:
      return {treatments_of(schema, row)};
    case PolicyKind::sensitive_counterfactual:
      return {treatments_of(schema, counterfactual(*model_, row, {{scol_, policy_.group}}))};
    case PolicyKind::empirical_conditional:
    case PolicyKind::own_group_conditional:
      break;
  }
  const double g = policy_.kind == PolicyKind::own_group_conditional ? row[scol_] : policy_.group;
  const auto it = pools_.find(g);
  if (it == pools_.end() || it->second.empty()) throw error(errc::empty_policy, "no reference rows for the policy group");
  const auto& pool = it->second;
  std::mt19937_64 rng(row_seed(policy_.seed, row_index));
  const double shift = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  std::vector<std::vector<double>> out;
  out.reserve(policy_.sample_count);
  for (std::size_t j = 0; j < policy_.sample_count; ++j) {
    double q = van_der_corput(j) + shift;
    q -= std::floor(q);
    const auto k = std::min(pool.size() - 1, static_cast<std::size_t>(q * static_cast<double>(pool.size())));
    out.push_back(pool[k]);
  }
  return out;
}

double fair_risk_score(const Scm& model, std::span<const double> row, std::size_t row_index,
                       const ResolvedPolicy& policy) {
  const FeatureSchema& schema = model.schema();
  const auto tcols = schema.indices(Role::treatment);
  const std::size_t ycol = schema.outcome();
  std::vector<double> values(row.begin(), row.end());
  const auto zs = policy.draws(row, row_index);
  if (zs.empty()) throw error(errc::empty_policy, "policy produced no treatments");
  double total = 0.0;
  for (const auto& z : zs) {
    for (std::size_t j = 0; j < tcols.size(); ++j) values[tcols[j]] = schema.coerce(tcols[j], z[j]);
    // columns between Z and Y (none under the block order) would need recomputation here
    total += 1.0 - probability_one(model, values, ycol);
  }
  return std::clamp(total / static_cast<double>(zs.size()), 0.0, 1.0);
}

std::vector<double> fair_risk_scores(const Dataset& data, const Scm& model, const ResolvedPolicy& policy,
                                     std::size_t threads) {
  std::vector<double> out(data.rows());
  parallel_for(data.rows(), threads, [&](std::size_t r) { out[r] = fair_risk_score(model, data.row(r), r, policy); });
  return out;
}

std::vector<std::pair<double, double>> risk_cdf(std::span<const double> scores) {
  std::vector<double> s(scores.begin(), scores.end());
  std::sort(s.begin(), s.end());
  std::vector<std::pair<double, double>> grid;
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    const auto k = std::upper_bound(s.begin(), s.end(), t) - s.begin();
    grid.emplace_back(t, s.empty() ? 0.0 : static_cast<double>(k) / static_cast<double>(s.size()));
  }
  return grid;
}

double kolmogorov_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (j == b.size() || (i < a.size() && a[i] <= b[j]))
      x = a[i];
    else
      x = b[j];
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

std::map<double, double> lgd(const Dataset& data, const std::string& amount_column, const std::string& group_column) {
  const std::size_t a = column_of(data, amount_column);
  if (data.schema()[a].type.kind != Kind::continuous)
    throw error(errc::invalid_argument, amount_column + " must be continuous");
  const std::size_t y = data.schema().outcome();
  return group_mean(data, group_column, [&](std::size_t r) { return (1.0 - data.at(r, y)) * data.at(r, a); });
}

std::map<double, double> esi(const Dataset& data, const EsiFormula& formula, const std::string& amount_column,
                             const std::string& group_column) {
  const std::size_t a = column_of(data, amount_column);
  const std::size_t y = data.schema().outcome();
  if (const auto* rd = std::get_if<RateDuration>(&formula)) {
    if (rd->rate_percent < 0.0) throw error(errc::negative_rate, "interest rate must be >= 0");
    const std::size_t t = column_of(data, rd->duration_column);
    const double rate = rd->rate_percent;
    return group_mean(data, group_column, [&](std::size_t r) {
      return data.at(r, y) * data.at(r, a) * rate / 100.0 * data.at(r, t) / 12.0;
    });
  }
  const auto& aa = std::get<AnnuityAmount>(formula);
  const std::size_t an = column_of(data, aa.annuity_column);
  const double years = aa.years;
  return group_mean(data, group_column,
                    [&](std::size_t r) { return data.at(r, an) * 12.0 * years - data.at(r, a); });
}

LossReport losses(const Dataset& data, const EsiFormula& formula, const std::string& amount_column,
                  const std::string& group_column, std::string tag) {
  LossReport rep;
  rep.tag = std::move(tag);
  const auto l = lgd(data, amount_column, group_column);
  const auto e = esi(data, formula, amount_column, group_column);
  const std::size_t g = column_of(data, group_column);
  for (double v : data.column(g)) ++rep.groups[v].rows;
  for (auto& [k, gl] : rep.groups) {
    gl.lgd = l.at(k);
    gl.esi = e.at(k);
  }
  return rep;
}

}  // namespace treatfair
