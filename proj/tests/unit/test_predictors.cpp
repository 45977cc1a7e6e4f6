#include <gtest/gtest.h>
#include <treatfair/error.hpp>
#include <treatfair/predictors.hpp>
#include <treatfair/synth_loan.hpp>

#include "toy_models.hpp"

using namespace treatfair;

namespace {

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> r(d.rows());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = i;
  return r;
}

}  // namespace

TEST(Predictor, SeparableDataIsLearned) {
  const Scm model = toy::chain({.zx = 0.5, .y_noise = false});
  const Dataset d = sample(model, 3000, 31);
  const PredictorModel p = train(d, d.schema(), "S", 1);
  EXPECT_GE(evaluate(p, d, p.test_rows).balanced_accuracy, 0.99);
}

TEST(Predictor, NoSignalMeansChance) {
  const Scm model = toy::chain({.yz = 0.0});
  const Dataset d = sample(model, 5000, 32);
  const PredictorModel p = train(d, d.schema(), "S", 2);
  EXPECT_NEAR(evaluate(p, d, p.test_rows).balanced_accuracy, 0.5, 0.03);
}

TEST(Predictor, SyntheticBeatsChance) {
  const Dataset d = generate(SynthConfig::balanced());
  const PredictorModel p = train(d, d.schema(), "G", 1);
  const auto m = evaluate(p, d, p.test_rows);
  EXPECT_GT(m.accuracy, 0.55);
  EXPECT_EQ(m.rows, p.test_rows.size());
}

TEST(Predictor, StratifiedSplit) {
  const Dataset d = generate(SynthConfig{.n = 1000});
  std::vector<std::size_t> tr, te;
  stratified_split(d, 0.6, 4, tr, te);
  EXPECT_EQ(tr.size() + te.size(), d.rows());
  std::size_t pos_train = 0, pos_all = 0;
  for (std::size_t r : tr) pos_train += d.at(r, 7) == 1.0;
  for (std::size_t r = 0; r < d.rows(); ++r) pos_all += d.at(r, 7) == 1.0;
  EXPECT_NEAR(static_cast<double>(pos_train), 0.6 * static_cast<double>(pos_all), 1.0);
}

TEST(Postprocess, DemographicParityOnTrain) {
  const Dataset d = generate(SynthConfig::balanced());
  const PredictorModel base = train(d, d.schema(), "G", 1);
  const PredictorModel p = postprocess(base, d, FairnessCriterion::demographic_parity);
  ASSERT_TRUE(p.feasible);
  EXPECT_LE(evaluate(p, d, p.train_rows).dp_gap, 0.02);
  EXPECT_EQ(p.weights, base.weights);
  EXPECT_EQ(p.intercept, base.intercept);
  EXPECT_EQ(p.thresholds.size(), 2u);
}

TEST(Postprocess, EqualizedOddsOnTrain) {
  const Dataset d = generate(SynthConfig::balanced());
  const PredictorModel p = postprocess(train(d, d.schema(), "G", 1), d, FairnessCriterion::equalized_odds);
  ASSERT_TRUE(p.feasible);
  EXPECT_LE(evaluate(p, d, p.train_rows).eod_gap, 0.03);
}

TEST(Postprocess, IdenticalGroupsShareThreshold) {
  // second half repeats the first with S flipped; the S weight is zeroed so scores match
  const Dataset half = sample(toy::chain({.xs = 0.0, .zs = 0.0}), 2000, 33);
  Dataset d = half;
  for (std::size_t r = 0; r < half.rows(); ++r) {
    auto row = half.row(r);
    row[0] = 1.0 - row[0];
    d.append_row(row);
  }
  PredictorModel p = train(d, d.schema(), "S", 5);
  for (std::size_t j = 0; j < p.features.size(); ++j)
    if (p.features[j].column == 0) p.weights[j] = 0.0;
  p.train_rows = all_rows(d);
  for (FairnessCriterion c : {FairnessCriterion::demographic_parity, FairnessCriterion::equalized_odds}) {
    const PredictorModel q = postprocess(p, d, c);
    EXPECT_DOUBLE_EQ(q.thresholds.at(0.0), q.thresholds.at(1.0));
  }
}

TEST(Postprocess, DegenerateLabels) {
  const Dataset all_good = sample(toy::chain({.zs = 50.0, .zx = 0.0, .y_noise = false}), 200, 34);
  Dataset only_ones(all_good.schema());
  for (std::size_t r = 0; r < all_good.rows(); ++r)
    if (all_good.at(r, 3) == 1.0) only_ones.append_row(all_good.row(r));
  ASSERT_GT(only_ones.rows(), 10u);
  try {
    train(only_ones, only_ones.schema(), "S", 1);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::degenerate);
  }
}

TEST(AuditUnderPolicy, AcceptAllAndNone) {
  const Scm oracle = build_oracle(SynthConfig::balanced());
  const Dataset d = generate(SynthConfig{.n = 1500});
  PredictorModel p = train(d, d.schema(), "G", 1);
  const DisparityConfig c{"G", 0.0, 1.0, DeltaKind::difference, Statistic::median};
  p.thresholds = {{0.0, 0.0}, {1.0, 0.0}};
  EXPECT_EQ(to_json(audit_under_policy(d, oracle, p, c), d.schema()).dump(),
            to_json(audit(d, oracle, c), d.schema()).dump());
  p.thresholds = {{0.0, 2.0}, {1.0, 2.0}};
  try {
    audit_under_policy(d, oracle, p, c);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::empty_group);
  }
}

TEST(AuditUnderPolicy, DirectDisparityUnchangedBySelection) {
  const Scm oracle = build_oracle(SynthConfig::balanced());
  const Dataset d = generate(SynthConfig::balanced());
  const PredictorModel p = postprocess(train(d, d.schema(), "G", 1), d, FairnessCriterion::demographic_parity);
  const auto r = audit_under_policy(d, oracle, p, {"G", 0.0, 1.0, DeltaKind::difference, Statistic::median});
  EXPECT_NEAR(r.dtd[0].median, -2.0, 1e-9);
  EXPECT_NEAR(r.dtd[1].median, -5.0, 1e-9);
}

TEST(Predictor, JsonRoundTrip) {
  const Dataset d = generate(SynthConfig{.n = 1000});
  const PredictorModel p = postprocess(train(d, d.schema(), "G", 1), d, FairnessCriterion::demographic_parity);
  const PredictorModel q = predictor_from_json(to_json(p), d.schema());
  EXPECT_EQ(q.thresholds, p.thresholds);
  EXPECT_EQ(q.criterion, p.criterion);
  for (std::size_t r = 0; r < d.rows(); r += 13) EXPECT_DOUBLE_EQ(q.score(d.row(r)), p.score(d.row(r)));
  EXPECT_THROW(predictor_from_json(nlohmann::json{{"weights", 3}}, d.schema()), error);
  EXPECT_EQ(criterion_from_string("dp"), FairnessCriterion::demographic_parity);
  EXPECT_THROW(criterion_from_string("calibration"), error);
}
