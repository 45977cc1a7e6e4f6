#include <gtest/gtest.h>
#include <treatfair/disparity.hpp>
#include <treatfair/error.hpp>
#include <treatfair/synth_loan.hpp>

#include <Eigen/Dense>

using namespace treatfair;

namespace {

enum : std::size_t { G, A, E, I, S, L, D, Y };

double mean_of(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// OLS weight of regressors[0] in target ~ 1 + regressors + A^2
double partial_slope(const Dataset& d, std::size_t target, std::vector<std::size_t> regressors) {
  const auto k = regressors.size();
  Eigen::MatrixXd X(d.rows(), k + 2);
  Eigen::VectorXd y(d.rows());
  for (std::size_t r = 0; r < d.rows(); ++r) {
    X(r, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j) X(r, j + 1) = d.at(r, regressors[j]);
    X(r, k + 1) = d.at(r, A) * d.at(r, A);
    y(r) = d.at(r, target);
  }
  return X.colPivHouseholderQr().solve(y)(1);
}

}  // namespace

TEST(SynthLoan, SchemaRoles) {
  const FeatureSchema s = synth_schema();
  EXPECT_EQ(s.indices(Role::sensitive), (std::vector<std::size_t>{G, A}));
  EXPECT_EQ(s.indices(Role::covariate), (std::vector<std::size_t>{E, I, S}));
  EXPECT_EQ(s.indices(Role::treatment), (std::vector<std::size_t>{L, D}));
  EXPECT_EQ(s.outcome(), Y);
  EXPECT_EQ(s[G].labels, (std::vector<std::string>{"F", "M"}));
}

TEST(SynthLoan, BalancedConfigIsBalanced) {
  const Dataset d = generate(SynthConfig::balanced());
  ASSERT_EQ(d.rows(), 5000u);
  EXPECT_NEAR(mean_of(d.column(G)), 0.5, 0.02);
  EXPECT_NEAR(mean_of(d.column(Y)), 0.5, 0.05);
}

TEST(SynthLoan, UnbalancedConfigLeansTowardDefault) {
  const Dataset bal = generate(SynthConfig::balanced());
  const Dataset unb = generate(SynthConfig::unbalanced());
  EXPECT_LT(mean_of(unb.column(Y)), 0.5);
  EXPECT_LT(mean_of(unb.column(Y)), mean_of(bal.column(Y)));
}

TEST(SynthLoan, AgeMeanFromShiftedGamma) {
  const Dataset d = generate(SynthConfig::balanced());
  EXPECT_NEAR(mean_of(d.column(A)), 0.0, 0.6);
}

TEST(SynthLoan, SeedDeterminism) {
  SynthConfig c;
  c.n = 1000;
  c.seed = 42;
  EXPECT_EQ(generate(c, 1), generate(c, 3));
  c.seed = 43;
  EXPECT_FALSE(generate(c) == generate(SynthConfig{.n = 1000, .seed = 42}));
}

TEST(SynthLoan, ZeroBetaRemovesSavingsEffectOnAmount) {
  SynthConfig c;
  c.beta = 0.0;
  c.n = 50000;
  EXPECT_NEAR(partial_slope(generate(c), L, {S, A, G}), 0.0, 0.02);
  c.beta = 0.03;
  EXPECT_NEAR(partial_slope(generate(c), L, {S, A, G}), 0.03, 0.02);
}

TEST(SynthLoan, DirectShiftsAreExactPerRow) {
  const Scm model = build_oracle(SynthConfig::balanced());
  const Dataset d = generate(SynthConfig::balanced());
  DisparityConfig c{"G", 0.0, 1.0, DeltaKind::difference, Statistic::mean};
  const auto dtd_mean = dtd(d, model, c);
  EXPECT_NEAR(dtd_mean[0], -2.0, 1e-9);
  EXPECT_NEAR(dtd_mean[1], -5.0, 1e-9);
  c.statistic = Statistic::median;
  const auto t = ttd(d, model, c);
  EXPECT_NEAR(t[0], -1.95, 0.05);
  EXPECT_NEAR(t[1], -4.94, 0.10);
  // D differs from L only through the direct 3(1-G) term
  EXPECT_NEAR(t[1] - t[0], -3.0, 1e-9);
}

TEST(SynthLoan, GenderFlipWithEverythingPinnedActsOnlyThroughGamma) {
  SynthConfig c = SynthConfig::balanced();
  c.gamma = 0.0;
  c.outcome_variant = OutcomeVariant::deterministic_threshold;
  const Scm flat = build_oracle(c);
  const Dataset d = sample(flat, 500, 3);
  for (std::size_t r = 0; r < d.rows(); ++r) {
    const auto row = d.row(r);
    EXPECT_EQ(direct_sensitive_label_effect(flat, row, G, 1.0 - row[G]), row[Y]);
  }
}

TEST(SynthLoan, ConfigValidation) {
  SynthConfig c;
  c.beta = 0.1;
  EXPECT_THROW(c.validate(), error);
  c.beta = 0.0;
  c.n = 0;
  EXPECT_THROW(c.validate(), error);
  EXPECT_EQ(to_string(OutcomeVariant::noisy_threshold), "noisy");
  EXPECT_EQ(outcome_variant_from_string("deterministic"), OutcomeVariant::deterministic_threshold);
  EXPECT_THROW(outcome_variant_from_string("other"), error);
}

TEST(SynthLoan, VarianceReadingIsSelectable) {
  SynthConfig c;
  c.gaussian_parameter = GaussianParameter::variance;
  const Scm model = build_oracle(c);
  EXPECT_DOUBLE_EQ(std::get<Gaussian>(model.noise(L).family()).variance, 10.0);
  EXPECT_DOUBLE_EQ(std::get<Gaussian>(build_oracle(SynthConfig{}).noise(L).family()).variance, 100.0);
}
