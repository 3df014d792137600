#pragma once

// Gamma-family primitives. Everything that can underflow is exposed in log
// space: the truncated-gamma laws used by the sampler have shape parameters up
// to (n + alpha) / b, far beyond the range where x^a e^{-x} is representable.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "hardedge/errors.hpp"

namespace hardedge {

namespace detail {

inline void require_shape(double a, const char* fn) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    std::ostringstream msg;
    msg << fn << ": shape must be positive and finite, got " << a;
    throw DomainError(msg.str());
  }
}

/// Stirling remainder lnΓ(a) - [(a - 1/2) ln a - a + ln(2π)/2], valid for a >= 10.
inline double stirling_correction(double a) {
  // B_{2k} / (2k (2k - 1)) for k = 1..8.
  static constexpr double kCoef[] = {
      1.0 / 12.0,        -1.0 / 360.0,  1.0 / 1260.0,          -1.0 / 1680.0,
      1.0 / 1188.0,      -691.0 / 360360.0, 1.0 / 156.0,       -3617.0 / 122400.0};
  const double inv = 1.0 / a;
  const double inv2 = inv * inv;
  double term = inv;
  double sum = 0.0;
  for (double c : kCoef) {
    sum += c * term;
    term *= inv2;
  }
  return sum;
}

/// ln(1 + y) - y without cancellation near y = 0.
inline double log1pmx(double y) {
  if (std::abs(y) < 0.5) {
    const double z = y / (2.0 + y);
    const double z2 = z * z;
    double power = z * z2;
    double series = 0.0;
    for (int k = 1; k < 40; ++k) {
      const double term = power / (2 * k + 1);
      series += term;
      if (std::abs(term) <= 1e-18 * std::abs(series)) break;
      power *= z2;
    }
    return -y * y / (2.0 + y) + 2.0 * series;
  }
  return std::log1p(y) - y;
}

/// Rough standard-normal quantile (|error| < 5e-4); only used to seed Newton.
inline double approx_normal_quantile(double p) {
  const double q = p < 0.5 ? p : 1.0 - p;
  const double t = std::sqrt(-2.0 * std::log(q));
  const double z = t - (2.515517 + 0.802853 * t + 0.010328 * t * t) /
                           (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
  return p < 0.5 ? -z : z;
}

}  // namespace detail

/// ln Γ(a) for a > 0.
inline double log_gamma(double a) {
  detail::require_shape(a, "log_gamma");
  if (a >= 10.0) {
    return (a - 0.5) * std::log(a) - a + 0.5 * std::log(2.0 * std::numbers::pi) +
           detail::stirling_correction(a);
  }
  // Shift up into the Stirling range: Γ(a) = Γ(a + k) / (a (a+1) ... (a+k-1)).
  double shifted = a;
  double product = 1.0;
  while (shifted < 10.0) {
    product *= shifted;
    shifted += 1.0;
  }
  return log_gamma(shifted) - std::log(product);
}

/// ln( x^a e^{-x} / Γ(a + 1) ), the common prefactor of both incomplete-gamma
/// expansions. Uses the Stirling form for large a so that the O(a ln a) terms
/// cancel analytically rather than numerically.
inline double log_gamma_prefix(double a, double x) {
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (a < 10.0) return a * std::log(x) - x - log_gamma(a + 1.0);
  return a * detail::log1pmx((x - a) / a) - 0.5 * std::log(2.0 * std::numbers::pi * a) -
         detail::stirling_correction(a);
}

namespace detail {

struct LogGammaP {
  double log_p;      // ln P(a, x)
  double dlog_p_dw;  // d ln P / d ln x
};

inline constexpr int kMaxSeriesTerms = 1'000'000;

/// Series branch (x < a + 1): P = prefix * sum_k x^k / ((a+1)...(a+k)).
inline LogGammaP lower_series(double a, double x) {
  double term = 1.0;
  double sum = 1.0;
  double denom = a;
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    denom += 1.0;
    term *= x / denom;
    sum += term;
    if (term < sum * 1e-17) {
      return {log_gamma_prefix(a, x) + std::log(sum), a / sum};
    }
  }
  throw ConvergenceError("reg_lower_gamma: series did not converge");
}

/// Continued-fraction branch (x >= a + 1), modified Lentz. Returns ln Q(a, x).
inline double log_upper_cf(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxSeriesTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) {
      return std::log(a) + log_gamma_prefix(a, x) + std::log(h);
    }
  }
  throw ConvergenceError("reg_lower_gamma: continued fraction did not converge");
}

inline LogGammaP log_lower_with_slope(double a, double x) {
  if (x == 0.0) return {-std::numeric_limits<double>::infinity(), a};
  if (std::isinf(x)) return {0.0, 0.0};
  if (x < a + 1.0) return lower_series(a, x);
  const double log_q = log_upper_cf(a, x);
  const double log_p = std::log1p(-std::exp(log_q));
  const double slope = std::exp(std::log(a) + log_gamma_prefix(a, x) - log_p);
  return {log_p, slope};
}

inline void require_x(double x, const char* fn) {
  if (!(x >= 0.0)) {
    std::ostringstream msg;
    msg << fn << ": argument must be non-negative, got " << x;
    throw DomainError(msg.str());
  }
}

}  // namespace detail

/// ln P(a, x) where P is the regularized lower incomplete gamma function.
/// Finite (not -inf) for every x > 0, however small P is.
inline double log_reg_lower_gamma(double a, double x) {
  detail::require_shape(a, "log_reg_lower_gamma");
  detail::require_x(x, "log_reg_lower_gamma");
  return detail::log_lower_with_slope(a, x).log_p;
}

/// P(a, x) = γ(a, x) / Γ(a).
inline double reg_lower_gamma(double a, double x) {
  detail::require_shape(a, "reg_lower_gamma");
  detail::require_x(x, "reg_lower_gamma");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return std::exp(detail::lower_series(a, x).log_p);
  return -std::expm1(detail::log_upper_cf(a, x));
}

namespace detail {

/// Solves ln P(a, e^w) = log_p for w. ln P(a, e^w) is the log-CDF of a
/// log-concave law, hence concave in w: Newton started left of the root
/// climbs monotonically, and a step landing outside the bracket is replaced by
/// bisection. `w_hi` may be +inf when no upper bound is known.
inline double solve_log_p_in_log_x(double a, double log_p, double w_hi) {
  const double lgamma_a1 = log_gamma(a + 1.0);
  // P <= x^a / Γ(a+1) gives a certified lower bound on the root.
  double lo = (log_p + lgamma_a1) / a;
  double hi = w_hi;
  if (std::isinf(hi)) {
    double step = 1.0;
    hi = std::max(lo, std::log(a + 1.0)) + step;
    while (log_lower_with_slope(a, std::exp(hi)).log_p < log_p) {
      lo = hi;
      step *= 2.0;
      hi += step;
    }
  }
  if (lo >= hi) return hi;

  double w = lo;
  if (a >= 1.0) {
    const double p = std::exp(log_p);
    if (p > 1e-300 && p < 1.0) {
      const double z = approx_normal_quantile(p);
      const double cube = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
      if (cube > 0.0) {
        const double guess = std::log(a) + 3.0 * std::log(cube);
        w = std::clamp(guess, lo, hi);
      }
    }
  }

  for (int iter = 0; iter < 200; ++iter) {
    const LogGammaP g = log_lower_with_slope(a, std::exp(w));
    const double resid = g.log_p - log_p;
    if (resid == 0.0) return w;
    if (resid < 0.0) {
      lo = w;
    } else {
      hi = w;
    }
    double next = w - resid / g.dlog_p_dw;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(w));
    if (std::abs(next - w) <= tol || hi - lo <= tol) return next;
    w = next;
  }
  throw ConvergenceError("inv_reg_lower_gamma: no convergence within 200 iterations");
}

}  // namespace detail

/// x >= 0 with ln P(a, x) = log_p. log_p = 0 maps to +inf.
inline double inv_log_reg_lower_gamma(double a, double log_p) {
  detail::require_shape(a, "inv_log_reg_lower_gamma");
  if (!(log_p <= 0.0)) {
    throw DomainError("inv_log_reg_lower_gamma: log-probability must be <= 0");
  }
  if (log_p == 0.0) return std::numeric_limits<double>::infinity();
  if (std::isinf(log_p)) return 0.0;
  return std::exp(detail::solve_log_p_in_log_x(a, log_p,
                                               std::numeric_limits<double>::infinity()));
}

/// Inverse of P(a, ·). p = 0 gives 0 and p = 1 gives +inf.
inline double inv_reg_lower_gamma(double a, double p) {
  detail::require_shape(a, "inv_reg_lower_gamma");
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream msg;
    msg << "inv_reg_lower_gamma: probability must lie in [0,1], got " << p;
    throw DomainError(msg.str());
  }
  if (p == 0.0) return 0.0;
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return inv_log_reg_lower_gamma(a, std::log(p));
}

}  // namespace hardedge
