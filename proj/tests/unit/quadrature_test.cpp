#include "hardedge/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace hardedge {
namespace {

TEST(Kronrod, ExactForLowDegreePolynomials) {
  // A single 15-point Kronrod panel integrates degree <= 22 exactly.
  for (int deg = 0; deg <= 22; ++deg) {
    auto f = [deg](double x) { return std::pow(x, deg); };
    const auto panel = detail::kronrod15(f, 0.0, 1.0);
    EXPECT_NEAR(panel.value, 1.0 / (deg + 1), 1e-15) << deg;
    // the embedded 7-point Gauss rule is exact to degree 13, so the error
    // estimate vanishes there
    if (deg <= 13) {
      EXPECT_LT(panel.error, 1e-15) << deg;
    }
  }
}

TEST(Adaptive, SmoothAndKinked) {
  EXPECT_NEAR(integrate([](double x) { return std::sin(x); }, 0.0, M_PI).value, 2.0, 1e-13);
  EXPECT_NEAR(integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0).value,
              0.5 * (0.09 + 0.49), 1e-12);
  EXPECT_NEAR(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0,
                        {1e-10, 1e-10, 4000})
                  .value,
              2.0, 1e-9);
}

TEST(Adaptive, ReversedLimits) {
  EXPECT_NEAR(integrate([](double x) { return x; }, 1.0, 0.0).value, -0.5, 1e-15);
}

TEST(Adaptive, ReportsFailure) {
  auto nasty = [](double x) { return std::sin(1.0 / x) / x; };
  EXPECT_THROW(integrate(nasty, 1e-8, 1.0, {1e-14, 1e-14, 20}), ConvergenceError);
}

TEST(SemiInfinite, ExponentialAndAlgebraicTails) {
  EXPECT_NEAR(integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0).value, 1.0, 1e-12);
  EXPECT_NEAR(integrate_to_infinity([](double x) { return 1.0 / (x * x); }, 2.0).value, 0.5, 1e-12);
  EXPECT_NEAR(integrate_to_infinity([](double x) { return 1.0 / (1.0 + x * x); }, 0.0).value,
              M_PI / 2, 1e-12);
}

TEST(GaussLegendre, NodesAndWeights) {
  for (int n : {1, 2, 5, 20, 64}) {
    GaussLegendreRule rule(n);
    double wsum = 0.0;
    for (double w : rule.weights()) wsum += w;
    EXPECT_NEAR(wsum, 2.0, 1e-14) << n;
    // exact to degree 2n - 1
    const int deg = 2 * n - 1;
    const double got = rule.apply([deg](double x) { return std::pow(x, deg) + std::pow(x, deg - 1); },
                                  0.0, 1.0);
    EXPECT_NEAR(got, 1.0 / (deg + 1) + (deg >= 1 ? 1.0 / deg : 0.0), 1e-13) << n;
  }
  EXPECT_THROW(GaussLegendreRule(0), PreconditionError);
}

}  // namespace
}  // namespace hardedge
