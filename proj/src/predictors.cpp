#include "treatfair/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "logistic.hpp"
#include "treatfair/error.hpp"

namespace treatfair {
namespace {

constexpr int kGrid = 500;  // step 0.002

struct GroupCounts {
  // counts of rows with score >= t for each grid threshold, split by label
  std::vector<double> pos1, pos0;
  double n1 = 0, n0 = 0;
};

GroupCounts count_grid(const std::vector<double>& s1, const std::vector<double>& s0) {
  GroupCounts g;
  g.n1 = static_cast<double>(s1.size());
  g.n0 = static_cast<double>(s0.size());
  auto above = [](const std::vector<double>& sorted, double t) {
    return static_cast<double>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
  };
  for (int i = 0; i <= kGrid; ++i) {
    const double t = i / static_cast<double>(kGrid);
    g.pos1.push_back(above(s1, t));
    g.pos0.push_back(above(s0, t));
  }
  return g;
}

double safe_div(double a, double b) { return b > 0 ? a / b : 0.0; }

}  // namespace

std::string_view to_string(FairnessCriterion c) {
  switch (c) {
    case FairnessCriterion::demographic_parity:
      return "dp";
    case FairnessCriterion::equalized_odds:
      return "eod";
    case FairnessCriterion::none:
      break;
  }
  return "none";
}

FairnessCriterion criterion_from_string(std::string_view text) {
  if (text == "dp" || text == "demographic_parity") return FairnessCriterion::demographic_parity;
  if (text == "eod" || text == "equalized_odds") return FairnessCriterion::equalized_odds;
  if (text == "none") return FairnessCriterion::none;
  throw error(errc::invalid_argument, "unknown criterion '" + std::string(text) + "'");
}

double PredictorModel::score(std::span<const double> row) const {
  double eta = intercept;
  for (std::size_t j = 0; j < features.size(); ++j) {
    const auto& f = features[j];
    const double raw = f.level >= 0 ? (row[f.column] == f.level ? 1.0 : 0.0) : row[f.column];
    eta += weights[j] * (raw - f.mean) / f.scale;
  }
  return detail::sigmoid(eta);
}

bool PredictorModel::accept(std::span<const double> row) const {
  const auto it = thresholds.find(row[sensitive_index]);
  return score(row) >= (it != thresholds.end() ? it->second : 0.5);
}

void stratified_split(const Dataset& data, double train_fraction, std::uint64_t seed, std::vector<std::size_t>& train,
                      std::vector<std::size_t>& test) {
  train.clear();
  test.clear();
  const std::size_t y = data.schema().outcome();
  std::mt19937_64 rng(seed);
  for (double label : {0.0, 1.0}) {
    std::vector<std::size_t> idx;
    for (std::size_t r = 0; r < data.rows(); ++r)
      if (data.at(r, y) == label) idx.push_back(r);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto k = static_cast<std::size_t>(std::round(train_fraction * static_cast<double>(idx.size())));
    train.insert(train.end(), idx.begin(), idx.begin() + static_cast<long>(k));
    test.insert(test.end(), idx.begin() + static_cast<long>(k), idx.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
}

PredictorModel train(const Dataset& data, const FeatureSchema& schema, const std::string& sensitive_column,
                     std::uint64_t seed, double train_fraction) {
  if (!(data.schema() == schema)) throw error(errc::schema_mismatch, "dataset does not conform to the schema");
  const std::size_t scol = schema.index_of(sensitive_column);
  if (schema[scol].role != Role::sensitive) throw error(errc::invalid_argument, sensitive_column + " is not sensitive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw error(errc::invalid_argument, "train fraction must be in (0,1)");

  PredictorModel m;
  m.sensitive_column = sensitive_column;
  m.sensitive_index = scol;
  m.split_seed = seed;
  m.data_rows = data.rows();
  stratified_split(data, train_fraction, seed, m.train_rows, m.test_rows);
  const std::size_t ycol = schema.outcome();
  double n1 = 0;
  for (std::size_t r : m.train_rows) n1 += data.at(r, ycol);
  const double n = static_cast<double>(m.train_rows.size());
  if (n1 == 0 || n1 == n) throw error(errc::degenerate, "both labels must be present in the training split");

  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].role == Role::outcome) continue;
    if (schema[c].type.kind == Kind::categorical) {
      for (int l = 1; l < schema[c].type.cardinality; ++l) {
        const std::string label = static_cast<std::size_t>(l) < schema[c].labels.size() ? schema[c].labels[l]
                                                                                         : std::to_string(l);
        m.features.push_back({schema[c].name + "=" + label, c, l});
      }
    } else {
      m.features.push_back({schema[c].name, c, -1});
    }
  }
  const auto p = static_cast<Eigen::Index>(m.features.size());
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), p);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n)), w(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const std::size_t r = m.train_rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto& f = m.features[static_cast<std::size_t>(j)];
      X(i, j) = f.level >= 0 ? (data.at(r, f.column) == f.level ? 1.0 : 0.0) : data.at(r, f.column);
    }
    y(i) = data.at(r, ycol);
    w(i) = y(i) == 1.0 ? n / (2.0 * n1) : n / (2.0 * (n - n1));
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    auto& f = m.features[static_cast<std::size_t>(j)];
    f.mean = X.col(j).mean();
    const double var = (X.col(j).array() - f.mean).square().mean();
    f.scale = var > 1e-24 ? std::sqrt(var) : 1.0;
    X.col(j) = (X.col(j).array() - f.mean) / f.scale;
  }
  const auto fit = detail::fit_logistic(X, y, w, 1e-4);
  m.intercept = fit.beta(0);
  m.weights.assign(fit.beta.data() + 1, fit.beta.data() + fit.beta.size());
  for (double v : data.column(scol)) m.thresholds[v] = 0.5;
  return m;
}

PredictorModel postprocess(PredictorModel model, const Dataset& data, FairnessCriterion criterion) {
  if (criterion == FairnessCriterion::none) return model;
  const std::size_t scol = data.schema().index_of(model.sensitive_column);
  const std::size_t ycol = data.schema().outcome();
  std::vector<std::size_t> rows = model.train_rows;
  if (data.rows() != model.data_rows || rows.empty()) {
    rows.resize(data.rows());
    std::iota(rows.begin(), rows.end(), 0);
  }

  std::map<double, std::pair<std::vector<double>, std::vector<double>>> by_group;
  for (std::size_t r : rows) {
    const auto row = data.row(r);
    auto& g = by_group[row[scol]];
    (row[ycol] == 1.0 ? g.first : g.second).push_back(model.score(row));
  }
  if (by_group.size() != 2) throw error(errc::empty_group, "post-processing needs exactly two groups present");
  std::vector<double> keys;
  std::vector<GroupCounts> gc;
  for (auto& [k, v] : by_group) {
    std::sort(v.first.begin(), v.first.end());
    std::sort(v.second.begin(), v.second.end());
    keys.push_back(k);
    gc.push_back(count_grid(v.first, v.second));
  }
  const double N1 = gc[0].n1 + gc[1].n1, N0 = gc[0].n0 + gc[1].n0;
  const double limit = criterion == FairnessCriterion::demographic_parity ? 0.02 : 0.03;

  struct Best {
    int a = -1, b = -1;
    double bacc = -1, acc = -1, gap = 1e9;
  } feasible, closest;
  for (int a = 0; a <= kGrid; ++a) {
    for (int b = 0; b <= kGrid; ++b) {
      const double tp = gc[0].pos1[a] + gc[1].pos1[b];
      const double fp = gc[0].pos0[a] + gc[1].pos0[b];
      const double tpr = safe_div(tp, N1), tnr = 1.0 - safe_div(fp, N0);
      const double bacc = 0.5 * (tpr + tnr);
      const double acc = (tp + (N0 - fp)) / (N1 + N0);
      double gap;
      if (criterion == FairnessCriterion::demographic_parity) {
        gap = std::abs(safe_div(gc[0].pos1[a] + gc[0].pos0[a], gc[0].n1 + gc[0].n0) -
                       safe_div(gc[1].pos1[b] + gc[1].pos0[b], gc[1].n1 + gc[1].n0));
      } else {
        gap = std::max(std::abs(safe_div(gc[0].pos1[a], gc[0].n1) - safe_div(gc[1].pos1[b], gc[1].n1)),
                       std::abs(safe_div(gc[0].pos0[a], gc[0].n0) - safe_div(gc[1].pos0[b], gc[1].n0)));
      }
      // strict comparisons keep the earliest (lowest) thresholds on ties
      if (gap <= limit + 1e-12 && (bacc > feasible.bacc + 1e-12 ||
                                   (std::abs(bacc - feasible.bacc) <= 1e-12 && acc > feasible.acc + 1e-12)))
        feasible = {a, b, bacc, acc, gap};
      if (gap < closest.gap - 1e-12 || (std::abs(gap - closest.gap) <= 1e-12 && bacc > closest.bacc + 1e-12))
        closest = {a, b, bacc, acc, gap};
    }
  }
  const Best& pick = feasible.a >= 0 ? feasible : closest;
  model.feasible = feasible.a >= 0;
  model.criterion = criterion;
  model.thresholds[keys[0]] = pick.a / static_cast<double>(kGrid);
  model.thresholds[keys[1]] = pick.b / static_cast<double>(kGrid);
  return model;
}

PredictorMetrics evaluate(const PredictorModel& model, const Dataset& data, std::span<const std::size_t> rows) {
  const std::size_t scol = data.schema().index_of(model.sensitive_column);
  const std::size_t ycol = data.schema().outcome();
  PredictorMetrics m;
  m.rows = rows.size();
  struct Acc {
    double n = 0, pos = 0, n1 = 0, tp = 0, n0 = 0, fp = 0;
  };
  std::map<double, Acc> groups;
  Acc all;
  for (std::size_t r : rows) {
    const auto row = data.row(r);
    const bool yhat = model.accept(row);
    const bool y = row[ycol] == 1.0;
    for (Acc* a : {&groups[row[scol]], &all}) {
      a->n += 1;
      a->pos += yhat;
      if (y) {
        a->n1 += 1;
        a->tp += yhat;
      } else {
        a->n0 += 1;
        a->fp += yhat;
      }
    }
  }
  m.accuracy = safe_div(all.tp + all.n0 - all.fp, all.n);
  m.balanced_accuracy = 0.5 * (safe_div(all.tp, all.n1) + 1.0 - safe_div(all.fp, all.n0));
  double pr_lo = 1, pr_hi = 0, tpr_lo = 1, tpr_hi = 0, fpr_lo = 1, fpr_hi = 0;
  for (const auto& [k, a] : groups) {
    const double pr = safe_div(a.pos, a.n), tpr = safe_div(a.tp, a.n1), fpr = safe_div(a.fp, a.n0);
    m.positive_rate[k] = pr;
    pr_lo = std::min(pr_lo, pr), pr_hi = std::max(pr_hi, pr);
    tpr_lo = std::min(tpr_lo, tpr), tpr_hi = std::max(tpr_hi, tpr);
    fpr_lo = std::min(fpr_lo, fpr), fpr_hi = std::max(fpr_hi, fpr);
  }
  if (!groups.empty()) {
    m.dp_gap = pr_hi - pr_lo;
    m.tpr_gap = tpr_hi - tpr_lo;
    m.fpr_gap = fpr_hi - fpr_lo;
    m.eod_gap = std::max(m.tpr_gap, m.fpr_gap);
  }
  return m;
}

DisparityReport audit_under_policy(const Dataset& data, const Scm& model, const PredictorModel& predictor,
                                   const DisparityConfig& config) {
  std::vector<std::size_t> accepted;
  for (std::size_t r = 0; r < data.rows(); ++r)
    if (predictor.accept(data.row(r))) accepted.push_back(r);
  if (accepted.empty()) throw error(errc::empty_group, "the predictor accepts no rows");
  return audit(data.subset(accepted), model, config);
}

nlohmann::json to_json(const PredictorModel& m) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t j = 0; j < m.features.size(); ++j) {
    const auto& f = m.features[j];
    features.push_back({{"name", f.name},
                        {"column", f.column},
                        {"level", f.level},
                        {"mean", f.mean},
                        {"scale", f.scale},
                        {"weight", m.weights[j]}});
  }
  nlohmann::json thresholds = nlohmann::json::array();
  for (const auto& [k, t] : m.thresholds) thresholds.push_back({{"group", k}, {"threshold", t}});
  return {{"spec_version", kReportVersion},
          {"kind", "logistic_group_threshold"},
          {"intercept", m.intercept},
          {"features", features},
          {"sensitive_column", m.sensitive_column},
          {"thresholds", thresholds},
          {"criterion", to_string(m.criterion)},
          {"feasible", m.feasible},
          {"objective", m.objective},
          {"split_seed", m.split_seed},
          {"data_rows", m.data_rows},
          {"train_rows", m.train_rows},
          {"test_rows", m.test_rows}};
}

nlohmann::json to_json(const PredictorMetrics& m) {
  nlohmann::json pr = nlohmann::json::object();
  for (const auto& [k, v] : m.positive_rate) {
    std::ostringstream key;
    key << k;
    pr[key.str()] = v;
  }
  return {{"rows", m.rows},
          {"accuracy", m.accuracy},
          {"balanced_accuracy", m.balanced_accuracy},
          {"dp_gap", m.dp_gap},
          {"tpr_gap", m.tpr_gap},
          {"fpr_gap", m.fpr_gap},
          {"eod_gap", m.eod_gap},
          {"positive_rate", pr}};
}

PredictorModel predictor_from_json(const nlohmann::json& j, const FeatureSchema& schema) {
  try {
    PredictorModel m;
    m.intercept = j.at("intercept").get<double>();
    for (const auto& f : j.at("features")) {
      PredictorFeature pf;
      pf.name = f.at("name").get<std::string>();
      pf.column = f.at("column").get<std::size_t>();
      pf.level = f.at("level").get<int>();
      pf.mean = f.at("mean").get<double>();
      pf.scale = f.at("scale").get<double>();
      if (pf.column >= schema.size() || pf.scale == 0.0)
        throw error(errc::schema_mismatch, "predictor feature " + pf.name + " does not fit the schema");
      m.features.push_back(pf);
      m.weights.push_back(f.at("weight").get<double>());
    }
    m.sensitive_column = j.at("sensitive_column").get<std::string>();
    m.sensitive_index = schema.index_of(m.sensitive_column);
    for (const auto& t : j.at("thresholds")) {
      const double th = t.at("threshold").get<double>();
      if (!(th >= 0.0 && th <= 1.0)) throw error(errc::invalid_argument, "thresholds must lie in [0,1]");
      m.thresholds[t.at("group").get<double>()] = th;
    }
    m.criterion = criterion_from_string(j.at("criterion").get<std::string>());
    m.feasible = j.value("feasible", true);
    m.objective = j.value("objective", std::string("balanced_accuracy"));
    m.split_seed = j.value("split_seed", std::uint64_t{0});
    m.data_rows = j.value("data_rows", std::size_t{0});
    m.train_rows = j.value("train_rows", std::vector<std::size_t>{});
    m.test_rows = j.value("test_rows", std::vector<std::size_t>{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::invalid_argument, std::string("malformed predictor document: ") + e.what());
  }
}

}  // namespace treatfair
