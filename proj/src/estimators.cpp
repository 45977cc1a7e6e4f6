#include "treatfair/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "logistic.hpp"
#include "treatfair/error.hpp"
#include "treatfair/parallel.hpp"

namespace treatfair {
namespace {

struct NodeFit {
  std::optional<Mechanism> mechanism;
  std::optional<NoiseSpec> noise;
};

NodeFit fit_root(const Dataset& data, std::size_t col) {
  const Column& column = data.schema()[col];
  const auto values = data.column(col);
  const double n = static_cast<double>(values.size());
  NodeFit out;
  if (column.type.kind == Kind::binary) {
    const double p = std::accumulate(values.begin(), values.end(), 0.0) / n;
    out.mechanism = Mechanism{col, {}, LearnedThreshold{{}, {}, 0.0, 1.0, 0.5}};
    out.noise = NoiseSpec(Bernoulli{p});
  } else if (column.type.kind == Kind::categorical) {
    std::vector<double> freq(static_cast<std::size_t>(column.type.cardinality), 0.0);
    for (double v : values) freq[static_cast<std::size_t>(v)] += 1.0 / n;
    const double total = std::accumulate(freq.begin(), freq.end(), 0.0);
    for (double& f : freq) f /= total;
    out.mechanism = Mechanism{col, {}, LearnedAdditive{{}, {}, 0.0, 0.0}};
    out.noise = NoiseSpec(Categorical{freq});
  } else {
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double var = values.size() > 1 ? ss / (n - 1.0) : 0.0;
    out.mechanism = Mechanism{col, {}, LearnedAdditive{{}, {}, mean, std::sqrt(var)}};
    out.noise = NoiseSpec(Gaussian{0.0, var});
  }
  return out;
}

NodeFit fit_node(const Dataset& data, const std::vector<std::vector<double>>& rows, std::size_t col,
                 const EstimatorConfig& config) {
  const FeatureSchema& schema = data.schema();
  const auto parents = learned_parents(schema, col);
  if (parents.empty()) return fit_root(data, col);

  const auto basis = learned_basis(schema, col, config.basis);
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(basis.size());
  if (static_cast<double>(n) < 10.0 * static_cast<double>(p + 1))
    throw error(errc::underdetermined, schema[col].name + " needs at least " + std::to_string(10 * (p + 1)) +
                                           " training rows, have " + std::to_string(n));
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = basis[j].value(rows[i]);
    y(i) = rows[i][col];
  }

  NodeFit out;
  if (schema[col].type.kind == Kind::binary) {
    const auto lf = detail::fit_logistic(X, y, Eigen::VectorXd::Ones(n), config.regularization);
    std::vector<double> w(lf.beta.data() + 1, lf.beta.data() + lf.beta.size());
    out.mechanism = Mechanism{col, parents, LearnedThreshold{basis, w, lf.beta(0), 1.0, 0.0}};
    out.noise = NoiseSpec(Logistic{0.0, 1.0});
    return out;
  }
  bool deficient = false;
  const Eigen::VectorXd b = detail::fit_ridge(X, y, config.regularization, deficient);
  if (deficient) throw error(errc::underdetermined, "design matrix for " + schema[col].name + " is rank-deficient");
  const Eigen::VectorXd resid = y - ((X * b.tail(p)).array() + b(0)).matrix();
  const double rm = resid.mean();
  const double var = n > 1 ? (resid.array() - rm).square().sum() / static_cast<double>(n - 1) : 0.0;
  std::vector<double> w(b.data() + 1, b.data() + b.size());
  out.mechanism = Mechanism{col, parents, LearnedAdditive{basis, w, b(0), std::sqrt(var)}};
  out.noise = NoiseSpec(Gaussian{0.0, var});
  return out;
}

}  // namespace

std::string_view to_string(BasisKind b) { return b == BasisKind::linear ? "linear" : "linear_plus_pairwise"; }

BasisKind basis_from_string(std::string_view text) {
  if (text == "linear") return BasisKind::linear;
  if (text == "linear_plus_pairwise" || text == "pairwise") return BasisKind::linear_plus_pairwise;
  throw error(errc::invalid_argument, "unknown basis '" + std::string(text) + "'");
}

void EstimatorConfig::validate() const {
  if (learner == Learner::oracle && !oracle) throw error(errc::invalid_argument, "oracle learner needs a model");
  if (!std::isfinite(regularization) || regularization < 0.0)
    throw error(errc::invalid_argument, "regularization must be finite and >= 0");
  double total = 0.0;
  for (double f : train_split) {
    if (!(f > 0.0)) throw error(errc::invalid_argument, "split fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw error(errc::invalid_argument, "split fractions must sum to 1");
}

DataSplit split(const Dataset& data, const std::array<double, 3>& fractions, std::uint64_t seed) {
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::round(fractions[0] * static_cast<double>(data.rows())));
  const auto n_val = static_cast<std::size_t>(std::round(fractions[1] * static_cast<double>(data.rows())));
  const std::size_t a = std::min(n_train, order.size());
  const std::size_t b = std::min(a + n_val, order.size());
  auto take = [&](std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> idx(order.begin() + static_cast<long>(lo), order.begin() + static_cast<long>(hi));
    std::sort(idx.begin(), idx.end());
    return data.subset(idx);
  };
  return {take(0, a), take(a, b), take(b, order.size())};
}

std::vector<std::size_t> learned_parents(const FeatureSchema& schema, std::size_t col) {
  if (schema[col].role == Role::sensitive) return {};
  std::vector<std::size_t> out(col);
  std::iota(out.begin(), out.end(), 0);
  return out;
}

std::vector<BasisTerm> learned_basis(const FeatureSchema& schema, std::size_t col, BasisKind basis) {
  std::vector<BasisTerm> terms;
  const auto parents = learned_parents(schema, col);
  for (std::size_t p : parents) {
    if (schema[p].type.kind == Kind::categorical) {
      for (int level = 1; level < schema[p].type.cardinality; ++level) terms.push_back({p, std::nullopt, level});
    } else {
      terms.push_back({p, std::nullopt, -1});
    }
  }
  if (basis == BasisKind::linear_plus_pairwise) {
    for (std::size_t s : parents) {
      if (schema[s].role != Role::sensitive || schema[s].type.kind == Kind::categorical) continue;
      for (std::size_t x : parents) {
        if (schema[x].type.kind == Kind::categorical) continue;
        // sensitive x sensitive pairs once each; a binary column squared is itself
        const bool sens_pair = schema[x].role == Role::sensitive && x >= s && !(x == s && schema[s].type.kind == Kind::binary);
        if (schema[x].role == Role::covariate || sens_pair) terms.push_back({s, x, -1});
      }
    }
  }
  return terms;
}

Scm fit(const Dataset& data, const FeatureSchema& schema, const EstimatorConfig& config) {
  config.validate();
  if (!(data.schema() == schema)) throw error(errc::schema_mismatch, "dataset does not conform to the schema");
  if (config.learner == Learner::oracle) {
    if (!(config.oracle->schema() == schema)) throw error(errc::schema_mismatch, "oracle model uses another schema");
    return *config.oracle;
  }
  const Dataset train = split(data, config.train_split, config.seed).train;
  if (train.rows() < 2) throw error(errc::underdetermined, "training split has fewer than two rows");
  std::vector<std::vector<double>> rows(train.rows());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = train.row(r);

  std::vector<NodeFit> nodes(schema.size());
  parallel_for(schema.size(), config.threads, [&](std::size_t c) { nodes[c] = fit_node(train, rows, c, config); });
  std::vector<Mechanism> mech;
  std::vector<NoiseSpec> noise;
  for (auto& nf : nodes) {
    mech.push_back(std::move(*nf.mechanism));
    noise.push_back(std::move(*nf.noise));
  }
  return Scm(schema, std::move(mech), std::move(noise));
}

GoodnessReport goodness(const Scm& model, const Dataset& holdout, std::size_t threads) {
  if (!(holdout.schema() == model.schema())) throw error(errc::schema_mismatch, "holdout does not match the model");
  const std::size_t d = model.size(), n = holdout.rows();
  std::vector<double> ll(n * d), res(n * d);
  parallel_for(n, threads, [&](std::size_t r) {
    const auto row = holdout.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      const Column& col = model.schema()[c];
      const Mechanism& mech = model.mechanism(c);
      const NoiseSpec& noise = model.noise(c);
      double l = 0.0, e = 0.0;
      if (col.type.kind == Kind::continuous) {
        const double u = abduct_node(model, row, c);
        double jac = 1.0;
        if (std::holds_alternative<ClosedForm>(mech.form)) {
          const double h = 1e-5 * std::max(1.0, std::abs(u));
          jac = (mech.raw(row, u + h) - mech.raw(row, u - h)) / (2.0 * h);
        } else if (const auto* lt = std::get_if<LearnedThreshold>(&mech.form)) {
          jac = lt->noise_scale;
        }
        l = noise.log_density(u) - std::log(std::abs(jac));
        e = u - noise.mean();
      } else if (col.type.kind == Kind::binary) {
        const double p1 = probability_one(model, row, c);
        l = std::log(row[c] == 1.0 ? p1 : 1.0 - p1);
        e = row[c] - p1;
      } else {
        double expected = 0.0;
        for (int k = 0; k < col.type.cardinality; ++k) {
          const auto [lo, hi] = noise_region(model, row, c, k);
          if (k == row[c]) l = std::log(hi - lo);
          expected += k * (hi - lo);
        }
        e = row[c] - expected;
      }
      ll[r * d + c] = l;
      res[r * d + c] = e;
    }
  });
  GoodnessReport report;
  for (std::size_t c = 0; c < d; ++c) {
    NodeGoodness g;
    g.column = model.schema()[c].name;
    g.n = n;
    double sum = 0.0, mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      sum += ll[r * d + c];
      mean += res[r * d + c];
    }
    mean /= std::max<std::size_t>(n, 1);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (res[r * d + c] - mean) * (res[r * d + c] - mean);
    g.log_likelihood = sum;
    g.mean_log_likelihood = n ? sum / static_cast<double>(n) : 0.0;
    g.residual_mean = mean;
    g.residual_variance = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
    g.standard_error = n > 0 ? std::sqrt(g.residual_variance / static_cast<double>(n)) : 0.0;
    report.total_log_likelihood += sum;
    report.nodes.push_back(g);
  }
  return report;
}

}  // namespace treatfair
