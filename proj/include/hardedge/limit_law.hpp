#pragma once

// Limit objects of the functional CLTs: the mixture densities ω₁, ω₂, the
// mean and covariance functionals m₁, m₂, m₁₂ of the limiting Gaussian
// process G, and the inverse τ = m₁⁻¹ that drives the hitting-time limit.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "hardedge/ensemble.hpp"
#include "hardedge/errors.hpp"
#include "hardedge/process.hpp"
#include "hardedge/quadrature.hpp"
#include "hardedge/rng.hpp"

namespace hardedge {

namespace detail {

/// ∫_0^1 s^m e^{-s x} ds by its power series; accurate for |x| < 2.
inline double omega_series(int m, double x) {
  double term = 1.0;  // (-x)^k / k!
  double sum = 1.0 / (m + 1);
  for (int k = 1; k < 60; ++k) {
    term *= -x / k;
    const double add = term / (k + m + 1);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace detail

/// ω₁(x) = (e^x - 1 - x) e^{-x} / x² = ∫_0^1 s e^{-sx} ds, a probability
/// density on [0, ∞) with algebraic tail 1/x².
inline double omega1(double x) {
  if (std::isinf(x)) return x > 0 ? 0.0 : std::numeric_limits<double>::infinity();
  if (std::abs(x) < 2.0) return detail::omega_series(1, x);
  return (-std::expm1(-x) - x * std::exp(-x)) / (x * x);
}

/// ω₂(x) = 2 (e^x - 1 - x - x²/2) e^{-x} / x³ = ∫_0^1 s² e^{-sx} ds.
inline double omega2(double x) {
  if (std::isinf(x)) return x > 0 ? 0.0 : std::numeric_limits<double>::infinity();
  if (std::abs(x) < 2.0) return detail::omega_series(2, x);
  return 2.0 * (-std::expm1(-x) - std::exp(-x) * x * (1.0 + 0.5 * x)) / (x * x * x);
}

/// One path of a centered Gaussian vector on a grid.
struct GridSample {
  std::vector<double> grid;
  std::vector<double> values;
  std::uint64_t seed = 0;
};

/// Cholesky factor of a Gram matrix with bounded jitter escalation:
/// 1e-12, 1e-10, 1e-8 times the largest diagonal entry.
class GaussianSampler {
 public:
  explicit GaussianSampler(const Eigen::MatrixXd& gram) {
    const Eigen::Index d = gram.rows();
    if (gram.cols() != d) throw PreconditionError("GaussianSampler: Gram matrix must be square");
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() == Eigen::Success) {
      factor_ = llt.matrixL();
      return;
    }
    const double scale = d > 0 ? std::max(gram.diagonal().cwiseAbs().maxCoeff(), 1e-300) : 1.0;
    double jitter = 1e-12 * scale;
    for (int attempt = 0; attempt < 3; ++attempt, jitter *= 100.0) {
      Eigen::MatrixXd shifted = gram;
      shifted.diagonal().array() += jitter;
      llt.compute(shifted);
      if (llt.info() == Eigen::Success) {
        factor_ = llt.matrixL();
        jitter_ = jitter;
        return;
      }
    }
    throw ConvergenceError("GaussianSampler: Cholesky failed after 3 jitter escalations");
  }

  Eigen::Index dimension() const { return factor_.rows(); }
  double jitter() const { return jitter_; }
  const Eigen::MatrixXd& factor() const { return factor_; }

  /// Draw `replicate` of the stream keyed by `seed`.
  std::vector<double> draw(std::uint64_t seed, std::uint64_t replicate = 0) const {
    const Eigen::Index d = dimension();
    Eigen::VectorXd z(d);
    const UniformStream stream(seed, replicate, 0);
    for (Eigen::Index i = 0; i < d; ++i) z[i] = stream.normal(static_cast<std::uint32_t>(i));
    const Eigen::VectorXd x = factor_ * z;
    return {x.data(), x.data() + d};
  }

 private:
  Eigen::MatrixXd factor_;
  double jitter_ = 0.0;
};

/// Evaluators for the limit laws attached to a fixed (κ, φ). Immutable after
/// construction; L = m₁(∞) is computed eagerly.
class LimitLaw {
 public:
  LimitLaw(const EnsembleParams& params, TestFunction phi)
      : LimitLaw(params.kappa(), std::move(phi)) {}

  LimitLaw(double kappa, TestFunction phi) : kappa_(kappa), phi_(std::move(phi)) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw PreconditionError("LimitLaw: kappa must lie in (0,1)");
    big_l_ = m_k(1, std::numeric_limits<double>::infinity());
  }

  double kappa() const { return kappa_; }
  const TestFunction& phi() const { return phi_; }

  /// m_k(t) = κ ∫_0^t φ^k ω₁, k ∈ {1, 2}; t may be +inf.
  double m_k(int k, double t) const {
    if (k != 1 && k != 2) throw PreconditionError("m_k: k must be 1 or 2");
    if (!(t >= 0.0)) throw DomainError("m_k: t must be non-negative");
    auto integrand = [this, k](double x) {
      const double f = phi_(x);
      return (k == 1 ? f : f * f) * omega1(x);
    };
    return kappa_ * integrate_pieces(integrand, 0.0, t);
  }

  double m1(double t) const { return m_k(1, t); }
  double m2(double t) const { return m_k(2, t); }

  /// m₁₂(t₁, t₂) = κ ∫_0^{t₁} ∫_0^{t₂} φ(x₁) φ(x₂) ω₂(x₁ + x₂). Writing ω₂ as
  /// ∫_0^1 s² e^{-s x} ds and substituting y = s x turns this into
  /// κ ∫_0^1 B(s, t₁) B(s, t₂) ds with B(s, t) = ∫_0^{s t} φ(y/s) e^{-y} dy,
  /// a bounded integrand on both levels.
  double m12(double t1, double t2) const {
    if (!(t1 >= 0.0 && t2 >= 0.0)) throw DomainError("m12: arguments must be non-negative");
    if (t1 == 0.0 || t2 == 0.0) return 0.0;
    if (t2 < t1) std::swap(t1, t2);  // symmetric; canonical order keeps results bitwise symmetric
    auto outer = [&](double s) { return damped_mass(s, t1) * damped_mass(s, t2); };
    return kappa_ * integrate(outer, 0.0, 1.0, {1e-13, 1e-12, 4000}).value;
  }

  /// E G(t₁) G(t₂) = m₂(t₁ ∧ t₂) - m₁₂(t₁, t₂).
  double cov_G(double t1, double t2) const { return m2(std::min(t1, t2)) - m12(t1, t2); }

  /// L = m₁(+∞).
  double big_L() const { return big_l_; }

  /// τ(h) = m₁⁻¹(h) for 0 <= h < L, by bracketed Newton with m₁' = κ φ ω₁.
  double tau(double h) const {
    require_positive("tau");
    if (!(h >= 0.0) || !(h < big_l_)) {
      throw DomainError("tau: level must lie in [0, L) with L = " + std::to_string(big_l_) +
                        " (the hitting time diverges for h >= L), got h = " + std::to_string(h));
    }
    if (h == 0.0) return 0.0;
    double lo = 0.0;
    double m_lo = 0.0;
    double hi = 1.0;
    double m_hi = m1(hi);
    while (m_hi <= h) {
      lo = hi;
      m_lo = m_hi;
      hi *= 2.0;
      if (hi > 1e300) throw ConvergenceError("tau: could not bracket the level");
      m_hi = m_lo + kappa_ * integrate_pieces(
                                 [this](double x) { return phi_(x) * omega1(x); }, lo, hi);
    }
    // Newton from the bracket midpoint; m₁ is re-evaluated incrementally from lo.
    double t = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
      const double m_t =
          m_lo + kappa_ * integrate_pieces([this](double x) { return phi_(x) * omega1(x); }, lo, t);
      const double resid = m_t - h;
      if (std::abs(resid) <= 1e-13) return t;
      if (resid < 0.0) {
        lo = t;
        m_lo = m_t;
      } else {
        hi = t;
      }
      const double slope = kappa_ * phi_(t) * omega1(t);
      double next = t - resid / slope;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, t)) {
        return next;
      }
      t = next;
    }
    throw ConvergenceError("tau: Newton iteration did not converge");
  }

  /// τ'(h) = 1 / (κ φ(τ(h)) ω₁(τ(h))).
  double tau_prime(double h) const {
    const double t = tau(h);
    return 1.0 / (kappa_ * phi_(t) * omega1(t));
  }

  /// Covariance of the hitting-time limit -τ'·G∘τ.
  double cov_Q(double h1, double h2) const {
    return tau_prime(h1) * tau_prime(h2) * cov_G(tau(h1), tau(h2));
  }

  /// Gram matrix of cov_G on a time grid.
  Eigen::MatrixXd gram_G(std::span<const double> grid) const {
    const auto d = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i; j < d; ++j) {
        g(i, j) = g(j, i) = cov_G(grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(j)]);
      }
    }
    return g;
  }

  /// Gram matrix of cov_Q on a level grid.
  Eigen::MatrixXd gram_Q(std::span<const double> levels) const {
    std::vector<double> times(levels.size()), scale(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
      times[i] = tau(levels[i]);
      scale[i] = 1.0 / (kappa_ * phi_(times[i]) * omega1(times[i]));
    }
    Eigen::MatrixXd g = gram_G(times);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      for (Eigen::Index j = 0; j < g.cols(); ++j) {
        g(i, j) *= scale[static_cast<std::size_t>(i)] * scale[static_cast<std::size_t>(j)];
      }
    }
    return g;
  }

 private:
  void require_positive(const char* fn) const {
    if (!phi_.positive) {
      throw PreconditionError(std::string(fn) + ": requires a positive test function");
    }
  }

  /// ∫_lo^hi f, splitting at the knots of φ; hi may be +inf.
  template <class F>
  double integrate_pieces(F&& f, double lo, double hi) const {
    std::vector<double> cuts{lo};
    for (double x : phi_.breakpoints) {
      if (x > lo && x < hi) cuts.push_back(x);
    }
    std::sort(cuts.begin(), cuts.end());
    const QuadratureOptions opts{1e-13, 1e-13, 4000};
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      total += integrate(f, cuts[i], cuts[i + 1], opts).value;
    }
    total += integrate_range(f, cuts.back(), hi, opts).value;
    return total;
  }

  /// B(s, t) = ∫_0^{s t} φ(y/s) e^{-y} dy for 0 < s <= 1.
  double damped_mass(double s, double t) const {
    const double top = s * t;
    std::vector<double> cuts{0.0};
    for (double x : phi_.breakpoints) {
      if (x > 0.0 && s * x < top) cuts.push_back(s * x);
    }
    std::sort(cuts.begin(), cuts.end());
    auto f = [this, s](double y) { return phi_(y / s) * std::exp(-y); };
    const QuadratureOptions opts{1e-14, 1e-13, 4000};
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      total += integrate(f, cuts[i], cuts[i + 1], opts).value;
    }
    total += integrate_range(f, cuts.back(), top, opts).value;
    return total;
  }

  double kappa_;
  TestFunction phi_;
  double big_l_ = 0.0;
};

/// Samples a centered Gaussian vector with covariance kernel(t_i, t_j) on a grid.
template <class Kernel>
GridSample sample_gp(Kernel&& kernel, std::span<const double> grid, std::uint64_t seed) {
  const auto d = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd gram(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      gram(i, j) = gram(j, i) =
          kernel(grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(j)]);
    }
  }
  GaussianSampler sampler(gram);
  return {std::vector<double>(grid.begin(), grid.end()), sampler.draw(seed), seed};
}

}  // namespace hardedge
