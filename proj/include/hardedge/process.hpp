#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hardedge/ensemble.hpp"
#include "hardedge/errors.hpp"
#include "hardedge/quadrature.hpp"

namespace hardedge {

/// A bounded test function φ together with the metadata the limit law and
/// hitting times need: the sup bound M, whether φ > 0, and (when φ is
/// differentiable) a bound on |φ'|. `breakpoints` lists points where φ is
/// not smooth, for quadrature.
struct TestFunction {
  std::function<double(double)> eval;
  double bound = 1.0;
  bool positive = false;
  std::optional<double> derivative_bound;
  std::string name;
  std::vector<double> breakpoints;

  double operator()(double x) const { return eval(x); }
};

/// φ ≡ value.
inline TestFunction phi_constant(double value) {
  TestFunction f;
  f.eval = [value](double) { return value; };
  f.bound = std::abs(value);
  f.positive = value > 0.0;
  f.derivative_bound = 0.0;
  f.name = value == 1.0 ? "one" : "constant(" + std::to_string(value) + ")";
  return f;
}

/// φ ≡ 1 (the counting statistic).
inline TestFunction phi_one() { return phi_constant(1.0); }

/// φ(x) = e^{-λ x}.
inline TestFunction phi_exp_decay(double lambda) {
  if (!(lambda >= 0.0)) throw PreconditionError("exp_decay: rate must be non-negative");
  TestFunction f;
  f.eval = [lambda](double x) { return std::exp(-lambda * x); };
  f.bound = 1.0;
  f.positive = true;
  f.derivative_bound = lambda;
  f.name = "exp_decay(" + std::to_string(lambda) + ")";
  return f;
}

/// φ(x) = 1 / (1 + x).
inline TestFunction phi_rational() {
  TestFunction f;
  f.eval = [](double x) { return 1.0 / (1.0 + x); };
  f.bound = 1.0;
  f.positive = true;
  f.derivative_bound = 1.0;
  f.name = "rational";
  return f;
}

/// Piecewise-linear interpolation through (xs[i], ys[i]), constant beyond the
/// first and last knots.
inline TestFunction phi_table(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || xs.size() != ys.size()) {
    throw PreconditionError("table phi: need equally many (>= 1) knots and values");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw PreconditionError("table phi: knots must be strictly increasing");
  }
  TestFunction f;
  f.bound = 0.0;
  f.positive = true;
  double slope = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (!std::isfinite(ys[i])) throw PreconditionError("table phi: values must be finite");
    f.bound = std::max(f.bound, std::abs(ys[i]));
    f.positive = f.positive && ys[i] > 0.0;
    if (i > 0) slope = std::max(slope, std::abs((ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1])));
  }
  f.derivative_bound = slope;
  f.breakpoints = xs;
  f.name = "table(" + std::to_string(xs.size()) + " knots)";
  f.eval = [xs = std::move(xs), ys = std::move(ys)](double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return ys[k - 1] + t * (ys[k] - ys[k - 1]);
  };
  return f;
}

/// Spot-checks the declared bound and positivity on a log-spaced probe grid.
/// Returns an empty string when consistent, otherwise a description.
inline std::string check_test_function(const TestFunction& phi) {
  std::vector<double> probes{0.0};
  for (double x = 1e-6; x < 1e7; x *= 1.5) probes.push_back(x);
  for (double x : phi.breakpoints) probes.push_back(x);
  for (double x : probes) {
    const double v = phi(x);
    if (!std::isfinite(v) || std::abs(v) > phi.bound * (1.0 + 1e-12)) {
      return "phi(" + std::to_string(x) + ") = " + std::to_string(v) + " exceeds bound " +
             std::to_string(phi.bound);
    }
    // a decaying φ may underflow to 0 far out; only require strict positivity up to x = 100
    if (phi.positive && (v < 0.0 || (v == 0.0 && x <= 100.0))) {
      return "phi flagged positive but phi(" + std::to_string(x) + ") = " + std::to_string(v);
    }
  }
  return {};
}

/// Right-continuous step path t ↦ S(t) starting from 0, with jumps at strictly
/// increasing locations.
class StepProcess {
 public:
  StepProcess() = default;

  /// `locations` must be sorted (ties allowed; they are merged) and paired
  /// with `weights`; the path jumps by weights[i] / n at locations[i].
  /// Cumulative values are formed from running sums of the raw weights and
  /// divided by n once, so S(∞) = (Σ φ) / n exactly as a single rounding.
  StepProcess(std::span<const double> locations, std::span<const double> weights, double n,
              bool monotone)
      : monotone_(monotone) {
    double running = 0.0;
    for (std::size_t i = 0; i < locations.size(); ++i) {
      running += weights[i];
      if (!locations_.empty() && locations[i] == locations_.back()) {
        increments_.back() += weights[i] / n;
        cumulative_.back() = running / n;
      } else {
        locations_.push_back(locations[i]);
        increments_.push_back(weights[i] / n);
        cumulative_.push_back(running / n);
      }
    }
  }

  const std::vector<double>& locations() const { return locations_; }
  const std::vector<double>& increments() const { return increments_; }
  /// S at each jump location (inclusive).
  const std::vector<double>& cumulative() const { return cumulative_; }
  bool monotone() const { return monotone_; }

  /// S(t), including a jump located exactly at t. eval(+inf) is the total mass.
  double eval(double t) const {
    const auto it = std::upper_bound(locations_.begin(), locations_.end(), t);
    if (it == locations_.begin()) return 0.0;
    return cumulative_[static_cast<std::size_t>(it - locations_.begin()) - 1];
  }

  double total() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

  /// inf{ s >= 0 : S(s) > h }, +inf when the path never exceeds h. Requires a
  /// non-decreasing path (built from a positive φ).
  double hitting_time(double h) const {
    if (!monotone_) {
      throw PreconditionError("hitting_time: process is not monotone (phi not flagged positive)");
    }
    if (h < 0.0) return 0.0;
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), h);
    if (it == cumulative_.end()) return std::numeric_limits<double>::infinity();
    return locations_[static_cast<std::size_t>(it - cumulative_.begin())];
  }

 private:
  std::vector<double> locations_;
  std::vector<double> increments_;
  std::vector<double> cumulative_;
  bool monotone_ = false;
};

/// S_n(t) = (1/n) Σ_j φ(U_j) 1[U_j <= t] as a step process.
inline StepProcess build_statistic(std::span<const double> u, const TestFunction& phi) {
  std::vector<double> sorted(u.begin(), u.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> weights(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) weights[i] = phi(sorted[i]);
  return StepProcess(sorted, weights, static_cast<double>(u.size()), phi.positive);
}

inline StepProcess build_statistic(const RadialConfiguration& config, const TestFunction& phi) {
  return build_statistic(std::span<const double>(config.u), phi);
}

namespace detail {

/// E[φ(U_j) 1[y_lo <= Y_j <= y_hi]] with Y_j = c e^{-β U_j} integrated against
/// the truncated gamma density of Y_j. Breakpoints around the gamma mode keep
/// the adaptive rule from stepping over the peak when the shape is large.
inline double particle_expectation_y(const ParticleLaw& law, const TestFunction& phi, double y_lo,
                                     double y_hi, double tol) {
  if (!(y_hi > y_lo)) return 0.0;
  const double s = law.shape();
  const double log_c = law.log_c();
  const double beta = law.beta();
  auto integrand = [&](double y) {
    const double dens = law.density_y(y);
    if (dens == 0.0) return 0.0;
    return phi((log_c - std::log(y)) / beta) * dens;
  };
  std::vector<double> cuts{y_lo, y_hi};
  const double mode = std::max(s - 1.0, 0.0);
  const double sd = std::sqrt(std::max(s, 1.0));
  for (double k : {-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0}) {
    const double y = mode + k * sd;
    if (y > y_lo && y < y_hi) cuts.push_back(y);
  }
  // Knots of a piecewise φ, mapped to y.
  for (double x : phi.breakpoints) {
    if (x > 0.0) {
      const double y = std::exp(log_c - beta * x);
      if (y > y_lo && y < y_hi) cuts.push_back(y);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  const QuadratureOptions opts{tol / static_cast<double>(cuts.size()), 1e-13, 4000};
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    total += integrate(integrand, cuts[i - 1], cuts[i], opts).value;
  }
  return total;
}

}  // namespace detail

/// Exact finite-n mean E S_n(t) for each t in `grid` (sorted ascending, +inf
/// allowed): (1/n) Σ_j ∫_0^t φ f_{n,j}, one adaptive quadrature per particle
/// and grid cell, accumulated along the grid.
inline std::vector<double> mean_exact(const EnsembleParams& p, const TestFunction& phi,
                                      std::span<const double> grid, double tol = 1e-11) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) throw DomainError("mean_exact: grid points must be non-negative");
    if (i > 0 && grid[i] < grid[i - 1]) throw PreconditionError("mean_exact: grid must be sorted");
  }
  std::vector<double> sums(grid.size(), 0.0);
  for (std::int64_t j = 1; j <= p.n(); ++j) {
    const ParticleLaw law(p, j);
    // U <= t  <=>  Y >= c e^{-β t}; accumulate from t = 0 (Y = c) downwards in Y.
    double y_prev = p.c();
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double y_t = std::isinf(grid[i]) ? 0.0 : std::exp(p.log_c() - p.beta() * grid[i]);
      acc += detail::particle_expectation_y(law, phi, y_t, y_prev, tol);
      y_prev = std::min(y_prev, y_t);
      sums[i] += acc;
    }
  }
  for (double& v : sums) v /= static_cast<double>(p.n());
  return sums;
}

inline double mean_exact(const EnsembleParams& p, const TestFunction& phi, double t) {
  const double grid[] = {t};
  return mean_exact(p, phi, grid).front();
}

}  // namespace hardedge
