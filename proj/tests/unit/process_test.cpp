#include "hardedge/process.hpp"
#include "hardedge/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace hardedge {
namespace {

double brute_eval(const std::vector<double>& u, const TestFunction& phi, double t) {
  double s = 0.0;
  for (double x : u) {
    if (x <= t) s += phi(x);
  }
  return s / static_cast<double>(u.size());
}

// Sums in ascending order of location, the same order the step process
// accumulates in, so plateau values compare exactly.
double brute_hit(const std::vector<double>& u, const TestFunction& phi, double h) {
  std::vector<double> sorted(u);
  std::sort(sorted.begin(), sorted.end());
  for (double t : sorted) {
    if (brute_eval(sorted, phi, t) > h) return t;
  }
  return INFINITY;
}

TestFunction phi_identity() {
  TestFunction f;
  f.eval = [](double x) { return x; };
  f.bound = 1e300;
  f.name = "identity";
  return f;
}

TEST(TestFunctions, Metadata) {
  EXPECT_EQ(check_test_function(phi_one()), "");
  EXPECT_EQ(check_test_function(phi_exp_decay(1.0)), "");
  EXPECT_EQ(check_test_function(phi_rational()), "");
  auto table = phi_table({0.0, 1.0, 3.0}, {1.0, 2.0, 0.5});
  EXPECT_EQ(check_test_function(table), "");
  EXPECT_DOUBLE_EQ(table(0.5), 1.5);
  EXPECT_DOUBLE_EQ(table(-1.0), 1.0);
  EXPECT_DOUBLE_EQ(table(10.0), 0.5);
  EXPECT_DOUBLE_EQ(*table.derivative_bound, 1.0);
  EXPECT_THROW(phi_table({1.0, 1.0}, {1.0, 2.0}), PreconditionError);
  TestFunction lying = phi_constant(-1.0);
  lying.positive = true;
  EXPECT_NE(check_test_function(lying), "");
}

TEST(Statistic, Normalization) {
  const std::vector<double> u{3.0, 0.5, 8.0, 1.0};
  const auto s = build_statistic(u, phi_one());
  EXPECT_EQ(s.eval(INFINITY), 1.0);
  EXPECT_EQ(s.total(), 1.0);
  EXPECT_EQ(s.eval(0.1), 0.0);
}

TEST(Statistic, TiesMergedAndRightContinuous) {
  const std::vector<double> u{1.0, 2.0, 2.0};
  const auto s = build_statistic(u, phi_identity());
  ASSERT_EQ(s.locations().size(), 2u);
  EXPECT_DOUBLE_EQ(s.eval(1.5), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.eval(2.0), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.eval(1.0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.eval(std::nextafter(1.0, 0.0)), 0.0);
}

TEST(Statistic, RandomAgreesWithDirectSummation) {
  std::mt19937_64 gen(5);
  std::exponential_distribution<double> ex(0.3);
  std::uniform_real_distribution<double> ut(0.0, 20.0);
  const auto phi = phi_exp_decay(0.2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> u(50);
    for (double& x : u) x = ex(gen);
    const auto s = build_statistic(u, phi);
    for (int k = 0; k < 50; ++k) {
      const double t = ut(gen);
      EXPECT_NEAR(s.eval(t), brute_eval(u, phi, t), 1e-14);
    }
  }
}

TEST(Hitting, SingleJump) {
  const std::vector<double> loc{2.0};
  const std::vector<double> w{0.5};
  const StepProcess s(loc, w, 1.0, true);
  EXPECT_EQ(s.hitting_time(0.0), 2.0);
  EXPECT_EQ(s.hitting_time(0.49), 2.0);
  EXPECT_TRUE(std::isinf(s.hitting_time(0.5)));
  EXPECT_TRUE(std::isinf(s.hitting_time(0.6)));
}

TEST(Hitting, RequiresMonotone) {
  const std::vector<double> u{1.0, 2.0};
  const auto s = build_statistic(u, phi_identity());
  EXPECT_THROW(s.hitting_time(0.1), PreconditionError);
}

TEST(Hitting, ZeroLevelIsFirstJump) {
  const std::vector<double> u{4.0, 0.7, 2.0};
  EXPECT_EQ(build_statistic(u, phi_one()).hitting_time(0.0), 0.7);
}

TEST(Hitting, RandomStaircasesMatchScan) {
  std::mt19937_64 gen(11);
  std::exponential_distribution<double> ex(0.5);
  std::uniform_real_distribution<double> uh(0.0, 1.1);
  for (const auto& phi : {phi_one(), phi_rational(), phi_exp_decay(0.1)}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> u(40);
      for (double& x : u) x = std::round(ex(gen) * 4) / 4;  // force ties
      const auto s = build_statistic(u, phi);
      for (int k = 0; k < 30; ++k) {
        double h = uh(gen) * s.total();
        if (k == 0) h = s.cumulative()[s.cumulative().size() / 2];  // exactly at a plateau
        EXPECT_EQ(s.hitting_time(h), brute_hit(u, phi, h)) << phi.name << " h=" << h;
      }
    }
  }
}

TEST(MeanExact, Boundaries) {
  const EnsembleParams p(0.0, 1.0, 0.5, 50);
  EXPECT_EQ(mean_exact(p, phi_one(), 0.0), 0.0);
  EXPECT_NEAR(mean_exact(p, phi_one(), INFINITY), 1.0, 1e-10);
}

TEST(MeanExact, MatchesCdfSum) {
  const EnsembleParams p(0.3, 1.5, 0.6, 80);
  const std::vector<double> grid{0.25, 1.0, 5.0, 40.0, 300.0};
  const auto m = mean_exact(p, phi_one(), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double sum = 0.0;
    for (std::int64_t j = 1; j <= p.n(); ++j) sum += cdf_u(p, j, grid[i]);
    EXPECT_NEAR(m[i], sum / p.n(), 1e-9) << grid[i];
  }
}

TEST(MeanExact, MatchesDensityQuadratureForSmoothPhi) {
  const EnsembleParams p(0.0, 1.0, 0.5, 20);
  const auto phi = phi_rational();
  double expected = 0.0;
  for (std::int64_t j = 1; j <= p.n(); ++j) {
    const ParticleLaw law(p, j);
    expected += integrate([&](double x) { return phi(x) * law.density(x); }, 0.0, 3.0,
                          {1e-14, 1e-13, 4000})
                    .value;
  }
  EXPECT_NEAR(mean_exact(p, phi, 3.0), expected / p.n(), 1e-10);
}

TEST(MeanExact, MatchesMonteCarlo) {
  const EnsembleParams p(0.0, 1.0, 0.5, 50);
  const ConfigurationSampler sampler(p);
  std::vector<double> values;
  for (int r = 0; r < 10000; ++r) {
    values.push_back(build_statistic(sampler.sample(17, static_cast<std::uint64_t>(r)), phi_one()).eval(2.0));
  }
  const auto est = mean_with_se(values);
  EXPECT_NEAR(est.mean, mean_exact(p, phi_one(), 2.0), 4 * est.se);
}

TEST(MeanExact, GridValidation) {
  const EnsembleParams p(0.0, 1.0, 0.5, 10);
  const std::vector<double> unsorted{2.0, 1.0};
  EXPECT_THROW(mean_exact(p, phi_one(), unsorted), PreconditionError);
  EXPECT_THROW(mean_exact(p, phi_one(), -1.0), DomainError);
}

}  // namespace
}  // namespace hardedge
