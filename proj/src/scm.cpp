#include "treatfair/scm.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "treatfair/error.hpp"
#include "treatfair/parallel.hpp"

namespace treatfair {
namespace {

double discretize(const Column& col, double raw) {
  switch (col.type.kind) {
    case Kind::continuous:
      return raw;
    case Kind::binary:
      return raw >= 0.0 ? 1.0 : 0.0;
    case Kind::categorical:
      if (std::isnan(raw)) return 0.0;
      return std::floor(std::clamp(raw, 0.0, static_cast<double>(col.type.cardinality - 1)));
  }
  return raw;
}

// raw value at which the discretized code reaches c (c >= 1)
double code_boundary(const Column& col, double c) { return col.type.kind == Kind::binary ? 0.0 : c; }

void check_column(const Scm& model, std::size_t col) {
  if (col >= model.size()) throw error(errc::unknown_column, "column index " + std::to_string(col) + " out of range");
}

double abduct_continuous(const Scm& model, std::span<const double> values, std::size_t col) {
  const Mechanism& mech = model.mechanism(col);
  const NoiseSpec& noise = model.noise(col);
  const double v = values[col];
  const double tol = 1e-9 * std::max(1.0, std::abs(v));
  if (auto u = mech.invert(values, v)) {
    if (std::abs(mech.raw(values, *u) - v) <= tol) return *u;
  }
  double lo = std::min(noise.lower(), -NoiseSpec::support_bound);
  double hi = std::max(noise.upper(), NoiseSpec::support_bound);
  const double r_lo = mech.raw(values, lo);
  const double r_hi = mech.raw(values, hi);
  if (!(r_lo != r_hi))
    throw error(errc::non_invertible, model.schema()[col].name + " does not depend monotonically on its noise");
  const bool increasing = r_hi > r_lo;
  for (int it = 0; it < 256 && hi - lo > 1e-10 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if ((mech.raw(values, mid) < v) == increasing)
      lo = mid;
    else
      hi = mid;
  }
  const double u = std::abs(mech.raw(values, lo) - v) <= std::abs(mech.raw(values, hi) - v) ? lo : hi;
  if (!(std::abs(mech.raw(values, u) - v) <= 1e-6 * std::max(1.0, std::abs(v))))
    throw error(errc::non_invertible, "no noise value reproduces " + model.schema()[col].name);
  return u;
}

}  // namespace

DoSet assign_block(const FeatureSchema& schema, Role role, std::span<const double> values) {
  const auto cols = schema.indices(role);
  if (cols.size() != values.size())
    throw error(errc::invalid_argument, "block " + std::string(to_string(role)) + " has " +
                                            std::to_string(cols.size()) + " columns, got " +
                                            std::to_string(values.size()) + " values");
  DoSet out;
  for (std::size_t j = 0; j < cols.size(); ++j) out.push_back({cols[j], values[j]});
  return out;
}

DoSet pin_block(const FeatureSchema& schema, Role role, std::span<const double> source) {
  DoSet out;
  for (std::size_t c : schema.indices(role)) out.push_back({c, source[c]});
  return out;
}

Scm::Scm(FeatureSchema schema, std::vector<Mechanism> mechanisms, std::vector<NoiseSpec> noise)
    : schema_(std::move(schema)), mechanisms_(std::move(mechanisms)), noise_(std::move(noise)) {
  const std::size_t n = schema_.size();
  if (mechanisms_.size() != n || noise_.size() != n)
    throw error(errc::invalid_argument, "every column needs exactly one mechanism and one noise spec");
  ancestors_.assign(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    const Mechanism& m = mechanisms_[i];
    if (m.node != i) throw error(errc::invalid_argument, "mechanism order does not match schema order");
    for (std::size_t p : m.parents) {
      if (p >= i)
        throw error(errc::invalid_argument,
                    "parent " + std::to_string(p) + " of " + schema_[i].name + " is not earlier in the schema");
      ancestors_[i][p] = true;
      for (std::size_t a = 0; a < n; ++a)
        if (ancestors_[p][a]) ancestors_[i][a] = true;
    }
    auto check_basis = [&](const std::vector<BasisTerm>& basis, std::size_t nweights) {
      if (basis.size() != nweights) throw error(errc::invalid_argument, "basis and weight sizes differ");
      auto is_parent = [&](std::size_t c) { return std::find(m.parents.begin(), m.parents.end(), c) != m.parents.end(); };
      for (const auto& t : basis)
        if (!is_parent(t.first) || (t.second && !is_parent(*t.second)))
          throw error(errc::invalid_argument, "basis of " + schema_[i].name + " uses a non-parent column");
    };
    if (const auto* cf = std::get_if<ClosedForm>(&m.form)) {
      if (!cf->evaluate) throw error(errc::invalid_argument, "closed form for " + schema_[i].name + " is empty");
    } else if (const auto* la = std::get_if<LearnedAdditive>(&m.form)) {
      check_basis(la->basis, la->weights.size());
    } else {
      const auto& lt = std::get<LearnedThreshold>(m.form);
      check_basis(lt.basis, lt.weights.size());
    }
  }
}

bool Scm::has_path(std::span<const std::size_t> from, std::size_t to) const {
  return std::any_of(from.begin(), from.end(), [&](std::size_t f) { return is_ancestor(f, to); });
}

double Scm::evaluate(std::span<const double> values, std::size_t col, double u) const {
  return discretize(schema_[col], mechanisms_[col].raw(values, u));
}

Dataset sample(const Scm& model, std::size_t n, std::uint64_t seed, std::size_t threads) {
  if (n < 1) throw error(errc::invalid_argument, "sample size must be >= 1");
  const std::size_t d = model.size();
  std::vector<std::vector<double>> columns(d, std::vector<double>(n));
  parallel_for(n, threads, [&](std::size_t r) {
    std::mt19937_64 rng(row_seed(seed, r));
    std::vector<double> values(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
      values[c] = model.evaluate(values, c, model.noise(c).sample(rng));
      columns[c][r] = values[c];
    }
  });
  Dataset out(model.schema(), std::move(columns));
  out.provenance().source = "sample";
  out.provenance().seed = seed;
  return out;
}

std::pair<double, double> noise_region(const Scm& model, std::span<const double> values, std::size_t col,
                                       double code) {
  const Column& column = model.schema()[col];
  if (!column.type.discrete()) throw error(errc::invalid_argument, column.name + " is not discrete");
  const Mechanism& mech = model.mechanism(col);
  const NoiseSpec& noise = model.noise(col);
  auto code_at = [&](double q) { return discretize(column, mech.raw(values, noise.quantile(q))); };
  const double c0 = code_at(0.0);
  const double c1 = code_at(1.0);
  if (c0 == c1) return code == c0 ? std::pair{0.0, 1.0} : std::pair{0.0, 0.0};
  const bool increasing = c1 > c0;
  // q at which the code crosses from < c to >= c
  auto boundary = [&](double c) {
    if (c <= std::min(c0, c1)) return increasing ? 0.0 : 1.0;
    if (c > std::max(c0, c1)) return increasing ? 1.0 : 0.0;
    if (!noise.discrete()) {
      if (auto u = mech.invert(values, code_boundary(column, c))) return std::clamp(noise.cdf(*u), 0.0, 1.0);
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 64; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((code_at(mid) >= c) == increasing)
        hi = mid;
      else
        lo = mid;
    }
    return 0.5 * (lo + hi);
  };
  if (increasing) return {boundary(code), boundary(code + 1)};
  return {boundary(code + 1), boundary(code)};
}

double probability_one(const Scm& model, std::span<const double> values, std::size_t col) {
  const auto [lo, hi] = noise_region(model, values, col, 1.0);
  return std::clamp(hi - lo, 0.0, 1.0);
}

double abduct_node(const Scm& model, std::span<const double> instance, std::size_t col) {
  check_column(model, col);
  const Column& column = model.schema()[col];
  if (!column.type.discrete()) return abduct_continuous(model, instance, col);
  const double code = instance[col];
  const auto [lo, hi] = noise_region(model, instance, col, code);
  const NoiseSpec& noise = model.noise(col);
  if (hi > lo) {
    // midpoint first, then probe inside the interval in case the edges are numerically tight
    for (double t : {0.5, 0.25, 0.75, 0.1, 0.9, 1e-3, 1.0 - 1e-3}) {
      const double u = noise.quantile(lo + t * (hi - lo));
      if (model.evaluate(instance, col, u) == code) return u;
    }
  }
  for (double q : {lo, hi}) {
    const double u = noise.quantile(q);
    if (model.evaluate(instance, col, u) == code) return u;
  }
  throw error(errc::inconsistent, "no noise value reproduces " + column.name + " = " + std::to_string(code));
}

ExogenousVector abduct(const Scm& model, std::span<const double> instance) {
  if (instance.size() != model.size()) throw error(errc::schema_mismatch, "instance width does not match model");
  ExogenousVector u(model.size());
  for (std::size_t c = 0; c < model.size(); ++c) u[c] = abduct_node(model, instance, c);
  return u;
}

Instance predict(const Scm& model, std::span<const double> u, const DoSet& overrides) {
  const std::size_t d = model.size();
  if (u.size() != d) throw error(errc::schema_mismatch, "noise vector width does not match model");
  std::vector<std::optional<double>> pinned(d);
  for (const auto& a : overrides) {
    check_column(model, a.column);
    pinned[a.column] = model.schema().coerce(a.column, a.value);
  }
  Instance values(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) values[c] = pinned[c] ? *pinned[c] : model.evaluate(values, c, u[c]);
  return values;
}

namespace {

// Columns downstream of no intervened column keep their factual value bit for
// bit; recomputing them from abducted noise only adds round-off.
void keep_unaffected(const Scm& model, std::span<const double> instance, const std::vector<std::size_t>& targets,
                     Instance& out) {
  for (std::size_t c = 0; c < out.size(); ++c) {
    const bool touched = std::any_of(targets.begin(), targets.end(),
                                     [&](std::size_t t) { return t == c || model.is_ancestor(t, c); });
    if (!touched) out[c] = instance[c];
  }
}

}  // namespace

Instance counterfactual(const Scm& model, std::span<const double> instance, const DoSet& action) {
  Instance out = predict(model, abduct(model, instance), action);
  std::vector<std::size_t> targets;
  for (const auto& a : action) targets.push_back(a.column);
  keep_unaffected(model, instance, targets, out);
  return out;
}

Instance path_specific_counterfactual(const Scm& model, std::span<const double> instance,
                                      const InterventionPlan& plan) {
  const std::size_t d = model.size();
  for (std::size_t k = 0; k < plan.stages.size(); ++k) {
    std::vector<bool> seen(d, false);
    for (const auto& a : plan.stages[k]) {
      check_column(model, a.column);
      if (seen[a.column])
        throw error(errc::invalid_argument, "column " + model.schema()[a.column].name + " assigned twice in a stage");
      seen[a.column] = true;
    }
    for (std::size_t l = k + 1; l < plan.stages.size(); ++l)
      for (const auto& late : plan.stages[l])
        for (const auto& early : plan.stages[k])
          if (model.is_ancestor(late.column, early.column))
            throw error(errc::plan_order_violation, "stage " + std::to_string(l + 1) + " intervenes on " +
                                                        model.schema()[late.column].name + ", an ancestor of " +
                                                        model.schema()[early.column].name);
  }
  ExogenousVector u = abduct(model, instance);
  DoSet pinned;
  for (const DoSet& stage : plan.stages) {
    const Instance world = predict(model, u, stage);
    for (const auto& a : stage) {
      try {
        u[a.column] = abduct_node(model, world, a.column);
      } catch (const error& e) {
        if (e.code() != errc::inconsistent && e.code() != errc::non_invertible) throw;
      }
      // the spliced noise reproduces the stage value; pinning avoids round-off
      pinned.push_back({a.column, world[a.column]});
    }
  }
  Instance out = predict(model, u, pinned);
  std::vector<std::size_t> targets;
  for (const auto& a : pinned) targets.push_back(a.column);
  keep_unaffected(model, instance, targets, out);
  return out;
}

InterventionPlan direct_path_plan(const Scm& model, std::span<const double> instance, std::size_t sensitive_col,
                                  double value) {
  check_column(model, sensitive_col);
  if (model.schema()[sensitive_col].role != Role::sensitive)
    throw error(errc::invalid_argument, model.schema()[sensitive_col].name + " is not a sensitive column");
  InterventionPlan plan;
  plan.stages.push_back({{sensitive_col, value}});
  plan.stages.push_back(pin_block(model.schema(), Role::covariate, instance));
  return plan;
}

double downstream_outcome(const Scm& model, std::span<const double> instance, std::span<const double> z_hat) {
  const Instance cf = counterfactual(model, instance, assign_block(model.schema(), Role::treatment, z_hat));
  return cf[model.schema().outcome()];
}

double direct_sensitive_label_effect(const Scm& model, std::span<const double> instance, std::size_t sensitive_col,
                                     double value) {
  InterventionPlan plan = direct_path_plan(model, instance, sensitive_col, value);
  for (const auto& a : pin_block(model.schema(), Role::treatment, instance)) plan.stages[1].push_back(a);
  return path_specific_counterfactual(model, instance, plan)[model.schema().outcome()];
}

}  // namespace treatfair
