#include <gtest/gtest.h>
#include <treatfair/error.hpp>
#include <treatfair/noise.hpp>

#include <cmath>
#include <random>

using namespace treatfair;

namespace {

std::pair<double, double> moments(const NoiseSpec& n, int draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double s = 0, s2 = 0;
  for (int i = 0; i < draws; ++i) {
    const double x = n.sample(rng);
    s += x;
    s2 += x * x;
  }
  const double m = s / draws;
  return {m, s2 / draws - m * m};
}

}  // namespace

TEST(Noise, GaussianSecondParameterIsVariance) {
  const NoiseSpec n(Gaussian{0.0, 0.25});
  const auto [m, v] = moments(n, 10000, 11);
  EXPECT_NEAR(std::sqrt(v), 0.5, 0.02);
  EXPECT_NEAR(m, 0.0, 0.02);
}

TEST(Noise, GammaIsShapeScale) {
  const NoiseSpec n(Gamma{10.0, 3.5});
  EXPECT_DOUBLE_EQ(n.mean(), 35.0);
  EXPECT_DOUBLE_EQ(n.variance(), 10.0 * 3.5 * 3.5);
  const auto [m, v] = moments(n, 20000, 5);
  EXPECT_NEAR(m, 35.0, 0.3);
  EXPECT_NEAR(v, 122.5, 5.0);
}

TEST(Noise, QuantileInvertsCdf) {
  for (const NoiseSpec& n : {NoiseSpec(Gaussian{1.0, 4.0}), NoiseSpec(Gamma{2.0, 1.5}), NoiseSpec(Logistic{0.5, 2.0})}) {
    for (double q : {0.01, 0.2, 0.5, 0.77, 0.99}) EXPECT_NEAR(n.cdf(n.quantile(q)), q, 1e-9) << n.name();
  }
}

TEST(Noise, QuantileTailsAreClipped) {
  const NoiseSpec n(Gaussian{0.0, 1.0});
  EXPECT_EQ(n.quantile(0.0), -NoiseSpec::support_bound);
  EXPECT_EQ(n.quantile(1.0), NoiseSpec::support_bound);
  EXPECT_EQ(NoiseSpec(Gamma{2.0, 1.0}).quantile(0.0), 0.0);
}

TEST(Noise, DiscreteFamilies) {
  const NoiseSpec b(Bernoulli{0.3});
  EXPECT_TRUE(b.discrete());
  EXPECT_DOUBLE_EQ(b.cdf(0.0), 0.7);
  EXPECT_DOUBLE_EQ(b.quantile(0.5), 0.0);
  EXPECT_DOUBLE_EQ(b.quantile(0.8), 1.0);
  EXPECT_NEAR(b.log_density(1.0), std::log(0.3), 1e-12);

  const NoiseSpec c(Categorical{{0.2, 0.5, 0.3}});
  EXPECT_DOUBLE_EQ(c.quantile(0.1), 0.0);
  EXPECT_DOUBLE_EQ(c.quantile(0.6), 1.0);
  EXPECT_DOUBLE_EQ(c.quantile(0.95), 2.0);
  EXPECT_NEAR(c.mean(), 1.1, 1e-12);

  const NoiseSpec p(PointMass{3.0});
  std::mt19937_64 rng(1);
  EXPECT_EQ(p.sample(rng), 3.0);
  EXPECT_EQ(p.variance(), 0.0);
}

TEST(Noise, InvalidParametersRejected) {
  EXPECT_THROW(NoiseSpec(Bernoulli{1.5}), error);
  EXPECT_THROW(NoiseSpec(Gaussian{0.0, -1.0}), error);
  EXPECT_THROW(NoiseSpec(Gamma{0.0, 1.0}), error);
  EXPECT_THROW(NoiseSpec(Gamma{1.0, -2.0}), error);
  EXPECT_THROW(NoiseSpec(Categorical{{0.5, 0.2}}), error);
}
