#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hsbm/stats.hpp"

using namespace hsbm;

TEST(Wilson, KnownValues) {
  // 95 of 100: centre (0.95 + 1.92/100) / 1.0384.
  const auto i = wilson_interval(95, 100);
  EXPECT_NEAR(i.lower, 0.8882, 5e-4);
  EXPECT_NEAR(i.upper, 0.9785, 5e-4);
  const auto zero = wilson_interval(0, 10);
  EXPECT_EQ(zero.lower, 0.0);
  EXPECT_GT(zero.upper, 0.0);
  const auto all = wilson_interval(10, 10);
  EXPECT_NEAR(all.upper, 1.0, 1e-12);
  EXPECT_LT(all.lower, 1.0);
  EXPECT_THROW(wilson_interval(1, 0), ParameterError);
  EXPECT_THROW(wilson_interval(3, 2), ParameterError);
}

TEST(Wilson, ContainsPointEstimate) {
  for (std::size_t n : {1, 7, 100, 1000})
    for (std::size_t s = 0; s <= n; s += std::max<std::size_t>(1, n / 7)) {
      const auto i = wilson_interval(s, n);
      const double p = static_cast<double>(s) / n;
      EXPECT_LE(i.lower, p + 1e-15);
      EXPECT_GE(i.upper, p - 1e-15);
    }
}

TEST(Quantile, TypeSeven) {
  const std::vector<double> xs{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(quantile(xs, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(xs, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(median(xs), 2.5);
  EXPECT_DOUBLE_EQ(quantile(xs, 0.05), 1.15);
  EXPECT_DOUBLE_EQ(mean(xs), 2.5);
  EXPECT_THROW(quantile({}, 0.5), ParameterError);
  EXPECT_THROW(quantile(xs, 1.5), ParameterError);
}

TEST(KolmogorovSmirnov, TwoSample) {
  EXPECT_EQ(ks_distance(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), 0.0);
  EXPECT_EQ(ks_distance(std::vector<double>{0, 0}, std::vector<double>{1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(ks_distance(std::vector<double>{1, 2, 3, 4}, std::vector<double>{3, 4, 5, 6}), 0.5);
  // Ties across samples are stepped together.
  EXPECT_DOUBLE_EQ(ks_distance(std::vector<double>{0, 1, 1, 1}, std::vector<double>{1, 1, 1, 1}), 0.25);
}

TEST(KolmogorovSmirnov, OneSampleDiscrete) {
  std::mt19937_64 rng(5);
  std::binomial_distribution<int> b(20, 0.3);
  std::vector<double> xs(4000);
  for (auto& x : xs) x = b(rng);
  auto cdf = [](double x) {
    double s = 0, term = std::pow(0.7, 20);
    for (int k = 0; k <= 20 && k <= x; ++k) {
      s += term;
      term *= (20.0 - k) / (k + 1) * 0.3 / 0.7;
    }
    return s;
  };
  EXPECT_LT(ks_distance(xs, cdf), 0.03);
  EXPECT_GT(ks_distance(xs, [](double x) { return x >= 10 ? 1.0 : 0.0; }), 0.3);
}

TEST(LinearFit, ExactLine) {
  const auto f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_THROW(linear_fit({1, 1}, {2, 3}), ParameterError);
}
