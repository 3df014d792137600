#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "hardedge/errors.hpp"

namespace hardedge {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo, hi, value, error;
};

template <class F>
Panel kronrod15(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
/// Throws ConvergenceError when the tolerance is not met within
/// `opts.max_intervals` panels.
template <class F>
QuadratureResult integrate(F&& f, double lo, double hi, const QuadratureOptions& opts = {}) {
  if (lo == hi) return {};
  if (hi < lo) {
    auto r = integrate(f, hi, lo, opts);
    r.value = -r.value;
    return r;
  }
  std::vector<detail::Panel> panels;
  panels.reserve(64);
  panels.push_back(detail::kronrod15(f, lo, hi));
  const auto by_error = [](const detail::Panel& a, const detail::Panel& b) {
    return a.error < b.error;
  };
  double total = panels.front().value;
  double error = panels.front().error;
  while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
    if (static_cast<int>(panels.size()) >= opts.max_intervals) {
      std::ostringstream msg;
      msg << "integrate: tolerance not met on [" << lo << ", " << hi << "], error estimate "
          << error;
      throw ConvergenceError(msg.str());
    }
    std::pop_heap(panels.begin(), panels.end(), by_error);
    const detail::Panel worst = panels.back();
    panels.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      throw ConvergenceError("integrate: interval collapsed to machine resolution");
    }
    panels.push_back(detail::kronrod15(f, worst.lo, mid));
    std::push_heap(panels.begin(), panels.end(), by_error);
    panels.push_back(detail::kronrod15(f, mid, worst.hi));
    std::push_heap(panels.begin(), panels.end(), by_error);
    // Re-summing avoids drift from repeated add/subtract.
    total = 0.0;
    error = 0.0;
    for (const auto& p : panels) {
      total += p.value;
      error += p.error;
    }
  }
  return {total, error, static_cast<int>(panels.size())};
}

/// ∫_lo^∞ f. The part beyond max(lo, 1) is mapped to (0, 1] with x = 1/v,
/// which keeps algebraic tails such as 1/x^2 exact.
template <class F>
QuadratureResult integrate_to_infinity(F&& f, double lo, const QuadratureOptions& opts = {}) {
  const double split = std::max(lo, 1.0);
  QuadratureResult head{};
  if (split > lo) head = integrate(f, lo, split, opts);
  auto mapped = [&f](double v) {
    const double x = 1.0 / v;
    const double fx = f(x);
    return fx == 0.0 ? 0.0 : fx / (v * v);
  };
  QuadratureResult tail = integrate(mapped, 0.0, 1.0 / split, opts);
  return {head.value + tail.value, head.error + tail.error, head.intervals + tail.intervals};
}

/// ∫_lo^hi f where hi may be +inf.
template <class F>
QuadratureResult integrate_range(F&& f, double lo, double hi, const QuadratureOptions& opts = {}) {
  if (std::isinf(hi)) return integrate_to_infinity(f, lo, opts);
  return integrate(f, lo, hi, opts);
}

/// Fixed-order Gauss-Legendre rule on [-1, 1]; nodes by Newton iteration on
/// the three-term Legendre recurrence.
class GaussLegendreRule {
 public:
  explicit GaussLegendreRule(int order) : nodes_(order), weights_(order) {
    if (order < 1) throw PreconditionError("GaussLegendreRule: order must be positive");
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        // p1 = P_n(x), p0 = P_{n-1}(x)
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes_[i] = -x;
      nodes_[n - 1 - i] = x;
      weights_[i] = w;
      weights_[n - 1 - i] = w;
    }
  }

  int order() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  /// ∫_lo^hi f with this rule.
  template <class F>
  double apply(F&& f, double lo, double hi) const {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(center + half * nodes_[i]);
    return sum * half;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

}  // namespace hardedge
