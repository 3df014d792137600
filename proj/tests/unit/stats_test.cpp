#include "hardedge/stats.hpp"
#include "hardedge/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace hardedge {
namespace {

TEST(Ks, ExactSmallSample) {
  const std::vector<double> xs{0.1, 0.5, 0.9};
  // uniform CDF: steps at i/3 vs x; largest gap is 1/3 - 0.1 or 0.5 - 1/3 ...
  const double d = ks_statistic(xs, [](double x) { return x; });
  EXPECT_NEAR(d, std::max({1.0 / 3 - 0.1, 0.1, 2.0 / 3 - 0.5, 0.5 - 1.0 / 3, 1.0 - 0.9, 0.9 - 2.0 / 3}),
              1e-15);
}

TEST(Ks, UniformSamplePasses) {
  std::vector<double> xs;
  for (std::uint64_t i = 0; i < 20000; ++i) xs.push_back(UniformStream(1, i, 0).uniform(0));
  EXPECT_LT(ks_statistic(xs, [](double x) { return x; }), ks_critical_1pct(xs.size()));
  EXPECT_GT(ks_statistic(xs, [](double x) { return x * x; }), ks_critical_1pct(xs.size()));
}

TEST(Moments, MeanAndCovariance) {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  const std::vector<double> b{2.0, 4.0, 6.0, 8.0};
  const auto m = mean_with_se(a);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.se, std::sqrt((5.0 / 3.0) / 4.0), 1e-15);
  const auto c = covariance_entry(a, b, 2.5, 5.0);
  EXPECT_DOUBLE_EQ(c.mean, 2.5);
  EXPECT_GT(c.se, 0.0);
  EXPECT_THROW(mean_with_se(std::vector<double>{1.0}), PreconditionError);
}

TEST(Moments, GaussianShape) {
  std::vector<double> z;
  const UniformStream s(4, 0, 0);
  for (std::uint32_t i = 0; i < 100000; ++i) z.push_back(s.normal(i));
  const auto sh = shape_moments(z);
  EXPECT_NEAR(sh.skewness, 0.0, 5 * sh.skewness_se);
  EXPECT_NEAR(sh.excess_kurtosis, 0.0, 5 * sh.excess_kurtosis_se);
  EXPECT_NEAR(sh.skewness_se, std::sqrt(6.0 / 100000), 1e-5);
  EXPECT_NEAR(sh.excess_kurtosis_se, std::sqrt(24.0 / 100000), 1e-5);
}

TEST(Moments, SkewedSampleDetected) {
  std::vector<double> e;
  for (std::uint64_t i = 0; i < 10000; ++i) e.push_back(-std::log(UniformStream(2, i, 0).uniform(0)));
  const auto sh = shape_moments(e);
  EXPECT_NEAR(sh.skewness, 2.0, 0.3);
  EXPECT_NEAR(sh.excess_kurtosis, 6.0, 2.0);
}

TEST(Isserlis, Gaussian) {
  auto cov = [](int i, int j) { return i == j ? 2.0 : 0.5; };
  EXPECT_DOUBLE_EQ(isserlis_moment({0, 0}, cov), 2.0);
  EXPECT_DOUBLE_EQ(isserlis_moment({0}, cov), 0.0);
  EXPECT_DOUBLE_EQ(isserlis_moment({0, 0, 1}, cov), 0.0);
  EXPECT_DOUBLE_EQ(isserlis_moment({0, 0, 0, 0}, cov), 3.0 * 4.0);
  // E[X0² X1²] = c00 c11 + 2 c01²
  EXPECT_DOUBLE_EQ(isserlis_moment({0, 0, 1, 1}, cov), 4.0 + 2 * 0.25);
  EXPECT_DOUBLE_EQ(isserlis_moment({0, 0, 0, 0, 0, 0}, cov), 15.0 * 8.0);
}

TEST(Slope, LogLog) {
  const std::vector<double> n{50, 100, 200, 400};
  std::vector<double> e;
  for (double v : n) e.push_back(3.0 / v);
  EXPECT_NEAR(fit_loglog_slope(n, e), -1.0, 1e-14);
  EXPECT_THROW(fit_loglog_slope(n, std::vector<double>{1, 0, 1, 1}), DomainError);
}

}  // namespace
}  // namespace hardedge
