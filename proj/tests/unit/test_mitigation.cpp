#include <gtest/gtest.h>
#include <treatfair/error.hpp>
#include <treatfair/mitigation.hpp>
#include <treatfair/synth_loan.hpp>

#include <cmath>

#include "toy_models.hpp"

using namespace treatfair;

namespace {

enum : std::size_t { G, A, E, I, S, L, D, Y };

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Dataset loan_rows(std::vector<std::vector<double>> rows) {
  Dataset d(synth_schema());
  for (auto& r : rows) d.append_row(r);
  return d;
}

}  // namespace

TEST(FairDataset, PreservesEverythingButInterventions) {
  const Scm model = build_oracle(SynthConfig::balanced());
  const Dataset d = generate(SynthConfig{.n = 2000});
  const FairDataset f = build_fair_dataset(d, model, "G", 0.0, 1.0);
  ASSERT_EQ(f.data.rows(), d.rows());
  EXPECT_EQ(f.data.schema(), d.schema());
  std::size_t females = 0;
  for (std::size_t r = 0; r < d.rows(); ++r) {
    for (std::size_t c : {G, A, E, I, S}) ASSERT_EQ(f.data.at(r, c), d.at(r, c));
    if (d.at(r, G) == 1.0) {
      ASSERT_EQ(f.data.row(r), d.row(r));
    } else {
      ++females;
      // male treatment for the same applicant: the +2 on L goes, savings shift through beta
      const double s_cf = counterfactual(model, d.row(r), {{G, 1.0}})[S];
      EXPECT_NEAR(f.data.at(r, L) - d.at(r, L), -2.0 + 0.03 * (s_cf - d.at(r, S)), 1e-9);
    }
  }
  EXPECT_EQ(f.intervened_rows, females);
}

TEST(FairDataset, NonHarmOnSyntheticData) {
  for (const SynthConfig& c : {SynthConfig::balanced(), SynthConfig::unbalanced()}) {
    const FairDataset f = build_fair_dataset(generate(c), build_oracle(c), "G", 0.0, 1.0);
    EXPECT_TRUE(f.non_harm);
    EXPECT_GE(f.fair_rate, f.factual_rate);
  }
}

TEST(FairDataset, IdentityWithoutTreatmentDisparity) {
  const Scm model = toy::chain({.xs = 0.0, .zs = 0.0});
  const Dataset d = sample(model, 500, 11);
  const FairDataset f = build_fair_dataset(d, model, "S", 0.0, 1.0);
  for (std::size_t r = 0; r < d.rows(); ++r) ASSERT_EQ(f.data.row(r), d.row(r));
  EXPECT_DOUBLE_EQ(f.fair_rate, f.factual_rate);
}

TEST(FairDataset, EmptyGroup) {
  const Scm model = toy::chain();
  Dataset d(toy::sxzy_schema());
  d.append_row(std::vector<double>{0, 0.1, 0.2, 1});
  try {
    build_fair_dataset(d, model, "S", 0.0, 1.0);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::empty_group);
  }
}

TEST(RiskScore, PolicyInvariantWhenOutcomeIgnoresTreatment) {
  const Scm model = toy::chain({.yz = 0.0, .ys = 1.0});
  const Dataset d = sample(model, 300, 12);
  for (PolicyKind k : {PolicyKind::factual, PolicyKind::empirical_conditional, PolicyKind::own_group_conditional,
                       PolicyKind::sensitive_counterfactual}) {
    const ResolvedPolicy p(model, d, {k, "S", 1.0, 3, 64});
    const auto scores = fair_risk_scores(d, model, p);
    for (std::size_t r = 0; r < d.rows(); ++r)
      ASSERT_NEAR(scores[r], 1.0 - sigmoid(d.at(r, 0) - 0.5), 1e-12);
  }
}

TEST(RiskScore, DegenerateMonteCarlo) {
  const Scm model = toy::chain({.y_noise = false});
  const Dataset d = sample(model, 300, 13);
  const ResolvedPolicy p(model, d, {});
  const auto scores = fair_risk_scores(d, model, p);
  for (std::size_t r = 0; r < d.rows(); ++r) ASSERT_EQ(scores[r], 1.0 - d.at(r, 3));
}

TEST(RiskScore, BoundedAndStableInSampleCount) {
  const Scm model = build_oracle(SynthConfig::balanced());
  const Dataset d = generate(SynthConfig{.n = 800});
  for (std::size_t k : {16u, 64u, 256u}) {
    const ResolvedPolicy a(model, d, {PolicyKind::empirical_conditional, "G", 1.0, 5, k});
    const ResolvedPolicy b(model, d, {PolicyKind::empirical_conditional, "G", 1.0, 5, 2 * k});
    const auto sa = fair_risk_scores(d, model, a);
    const auto sb = fair_risk_scores(d, model, b);
    for (std::size_t r = 0; r < d.rows(); ++r) {
      ASSERT_GE(sa[r], 0.0);
      ASSERT_LE(sa[r], 1.0);
      ASSERT_LE(std::abs(sa[r] - sb[r]), 1.0 / std::sqrt(static_cast<double>(k)));
    }
  }
}

TEST(RiskScore, DeterministicGivenSeedAndThreads) {
  const Scm model = build_oracle(SynthConfig::balanced());
  const Dataset d = generate(SynthConfig{.n = 500});
  const ResolvedPolicy p(model, d, {PolicyKind::own_group_conditional, "G", 0.0, 9, 32});
  EXPECT_EQ(fair_risk_scores(d, model, p, 1), fair_risk_scores(d, model, p, 4));
}

TEST(RiskScore, MaleScoresUnderFemalePolicyCloseTheGap) {
  const Scm model = build_oracle(SynthConfig::balanced());
  const Dataset d = generate(SynthConfig::balanced());
  auto ks = [&](const ResolvedPolicy& male_policy) {
    const ResolvedPolicy own(model, d, {PolicyKind::own_group_conditional, "G", 0.0, 1, 256});
    const auto male = fair_risk_scores(d, model, male_policy);
    const auto female = fair_risk_scores(d, model, own);
    std::vector<double> m, f;
    for (std::size_t r = 0; r < d.rows(); ++r) (d.at(r, G) == 1.0 ? m : f).push_back(d.at(r, G) == 1.0 ? male[r] : female[r]);
    return kolmogorov_distance(m, f);
  };
  const double before = ks(ResolvedPolicy(model, d, {PolicyKind::own_group_conditional, "G", 0.0, 1, 256}));
  const double after = ks(ResolvedPolicy(model, d, {PolicyKind::empirical_conditional, "G", 0.0, 1, 256}));
  EXPECT_LT(after, before);
}

TEST(RiskScore, EmptyPolicy) {
  const Scm model = toy::chain();
  Dataset d(toy::sxzy_schema());
  d.append_row(std::vector<double>{0, 0.1, 0.2, 1});
  try {
    ResolvedPolicy(model, d, {PolicyKind::empirical_conditional, "S", 1.0});
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::empty_policy);
  }
  const ResolvedPolicy own(model, d, {PolicyKind::own_group_conditional, "S", 0.0});
  const std::vector<double> male{1, 0.1, 0.2, 1};
  EXPECT_THROW(fair_risk_score(model, male, 0, own), error);
}

TEST(RiskCdf, GridShape) {
  const std::vector<double> two{0.2, 0.8};
  const auto cdf = risk_cdf(two);
  ASSERT_EQ(cdf.size(), 101u);
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    EXPECT_DOUBLE_EQ(cdf[i].first, i / 100.0);
    if (i > 0) EXPECT_GE(cdf[i].second, cdf[i - 1].second);
    if (i >= 20 && i < 80) EXPECT_DOUBLE_EQ(cdf[i].second, 0.5);
  }
  EXPECT_DOUBLE_EQ(cdf.back().second, 1.0);

  const std::vector<double> half(7, 0.5);
  for (const auto& [t, v] : risk_cdf(half)) EXPECT_DOUBLE_EQ(v, t < 0.5 ? 0.0 : 1.0);
}

TEST(RiskCdf, KolmogorovDistance) {
  EXPECT_DOUBLE_EQ(kolmogorov_distance({0.1, 0.2}, {0.1, 0.2}), 0.0);
  EXPECT_DOUBLE_EQ(kolmogorov_distance({0.1, 0.2}, {0.8, 0.9}), 1.0);
  EXPECT_DOUBLE_EQ(kolmogorov_distance({0.1, 0.5}, {0.3, 0.7}), 0.5);
}

TEST(Losses, HandExamples) {
  // (y, amount) = (1, 10) and (0, 20), both in group 0
  const Dataset d = loan_rows({{0, 0, 0, 0, 0, 10, 12, 1}, {0, 0, 0, 0, 0, 20, 12, 0}});
  EXPECT_DOUBLE_EQ(lgd(d, "L", "G").at(0.0), 10.0);
  const Dataset repaid = loan_rows({{0, 0, 0, 0, 0, 1200, 12, 1}, {1, 0, 0, 0, 0, 5, 3, 1}});
  EXPECT_DOUBLE_EQ(lgd(repaid, "L", "G").at(0.0), 0.0);
  EXPECT_DOUBLE_EQ(esi(repaid, RateDuration{10.0, "D"}, "L", "G").at(0.0), 120.0);
  const Dataset defaulted = loan_rows({{0, 0, 0, 0, 0, 1200, 12, 0}});
  EXPECT_DOUBLE_EQ(esi(defaulted, RateDuration{10.0, "D"}, "L", "G").at(0.0), 0.0);
  // annuity form: 12 * years * annuity - amount
  EXPECT_DOUBLE_EQ(esi(repaid, AnnuityAmount{"D", 15.0}, "L", "G").at(1.0), 3.0 * 12.0 * 15.0 - 5.0);
}

TEST(Losses, Errors) {
  const Dataset d = loan_rows({{0, 0, 0, 0, 0, 10, 12, 1}});
  try {
    lgd(d, "Amount", "G");
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::missing_column);
  }
  try {
    esi(d, RateDuration{-1.0, "D"}, "L", "G");
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::negative_rate);
  }
}

TEST(Losses, LinearUnderConcatenation) {
  const Dataset a = generate(SynthConfig{.n = 600, .seed = 3});
  const Dataset b = generate(SynthConfig{.n = 1400, .seed = 4});
  const LossReport ra = losses(a, RateDuration{10.0, "D"}, "L", "G", "a");
  const LossReport rb = losses(b, RateDuration{10.0, "D"}, "L", "G", "b");
  const LossReport rab = losses(a.concat(b), RateDuration{10.0, "D"}, "L", "G", "ab");
  for (double g : {0.0, 1.0}) {
    const auto& x = ra.groups.at(g);
    const auto& y = rb.groups.at(g);
    const double n = static_cast<double>(x.rows + y.rows);
    EXPECT_EQ(rab.groups.at(g).rows, x.rows + y.rows);
    EXPECT_NEAR(rab.groups.at(g).lgd, (x.lgd * x.rows + y.lgd * y.rows) / n, 1e-9);
    EXPECT_NEAR(rab.groups.at(g).esi, (x.esi * x.rows + y.esi * y.rows) / n, 1e-9);
    EXPECT_GE(x.lgd, 0.0);
    EXPECT_GE(x.esi, 0.0);
  }
}

TEST(Losses, FairDatasetLowersFemaleLgd) {
  const SynthConfig c = SynthConfig::balanced();
  const Dataset d = generate(c);
  const FairDataset f = build_fair_dataset(d, build_oracle(c), "G", 0.0, 1.0);
  EXPECT_LT(lgd(f.data, "L", "G").at(0.0), lgd(d, "L", "G").at(0.0));
  EXPECT_EQ(lgd(f.data, "L", "G").at(1.0), lgd(d, "L", "G").at(1.0));
}
