#pragma once

// Radial configuration of the ensemble confined by a hard wall at radius ρ, in
// hard-edge coordinates U = -(n κ / b) ln R.
//
// Particle j (1-based) has R_j distributed as Gamma(shape s_j, rate c)
// conditioned on R_j <= 1, with s_j = (j + α) / b and c = n ρ^{2b}. Particles
// are mutually independent, so a configuration is n inverse-CDF draws.

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hardedge/errors.hpp"
#include "hardedge/quadrature.hpp"
#include "hardedge/rng.hpp"
#include "hardedge/special_functions.hpp"

namespace hardedge {

/// Ensemble parameters (α, b, ρ, n) together with the derived constants.
/// Construction validates α > -1, b > 0, 0 < ρ < b^{-1/(2b)} and n >= 1.
class EnsembleParams {
 public:
  EnsembleParams(double alpha, double b, double rho, std::int64_t n)
      : alpha_(alpha), b_(b), rho_(rho), n_(n) {
    if (!(alpha > -1.0) || !std::isfinite(alpha)) {
      throw PreconditionError("alpha must satisfy alpha > -1 (got " + fmt(alpha) + ")");
    }
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw PreconditionError("b must be positive (got " + fmt(b) + ")");
    }
    if (n < 1) throw PreconditionError("n must be a positive integer");
    if (!(rho > 0.0)) throw PreconditionError("rho must be positive (got " + fmt(rho) + ")");
    const double droplet = std::pow(b, -1.0 / (2.0 * b));
    if (!(rho < droplet)) {
      throw PreconditionError("hard wall must lie inside the droplet: need rho < b^(-1/(2b)) = " +
                              fmt(droplet) + " (got rho = " + fmt(rho) + ")");
    }
    rho2b_ = std::pow(rho, 2.0 * b);
    kappa_ = 1.0 - b * rho2b_;
    c_ = static_cast<double>(n) * rho2b_;
    beta_ = b / (static_cast<double>(n) * kappa_);
    log_c_ = std::log(c_);
  }

  double alpha() const { return alpha_; }
  double b() const { return b_; }
  double rho() const { return rho_; }
  std::int64_t n() const { return n_; }

  /// ρ^{2b}
  double rho2b() const { return rho2b_; }
  /// κ = 1 - b ρ^{2b}, the limiting fraction of particles that stay at O(1).
  double kappa() const { return kappa_; }
  /// Gamma rate c = n ρ^{2b}.
  double c() const { return c_; }
  double log_c() const { return log_c_; }
  /// Scale β = b / (n κ) with R = exp(-β U).
  double beta() const { return beta_; }

  /// Gamma shape of particle j: (j + α) / b.
  double shape(std::int64_t j) const { return (static_cast<double>(j) + alpha_) / b_; }

  friend bool operator==(const EnsembleParams& a, const EnsembleParams& b) {
    return a.alpha_ == b.alpha_ && a.b_ == b.b_ && a.rho_ == b.rho_ && a.n_ == b.n_;
  }

 private:
  static std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  }

  double alpha_, b_, rho_;
  std::int64_t n_;
  double rho2b_ = 0, kappa_ = 0, c_ = 0, beta_ = 0, log_c_ = 0;
};

/// One sampled vector of hard-edge radii, indexed by particle (entry j-1 is
/// particle j).
struct RadialConfiguration {
  std::vector<double> u;
  EnsembleParams params;
  std::uint64_t seed = 0;
};

namespace detail {

inline void require_index(const EnsembleParams& p, std::int64_t j) {
  if (j < 1 || j > p.n()) {
    throw PreconditionError("particle index " + std::to_string(j) + " outside [1, " +
                            std::to_string(p.n()) + "]");
  }
}

}  // namespace detail

/// Normalized index θ_{n,j} = (j + α) / (b n ρ^{2b}).
inline double theta(const EnsembleParams& p, std::int64_t j) {
  detail::require_index(p, j);
  return p.shape(j) / p.c();
}

/// Law of a single U_{n,j}. Holds ln P(s, c) so repeated draws and CDF
/// evaluations skip the normalizer.
class ParticleLaw {
 public:
  ParticleLaw(const EnsembleParams& p, std::int64_t j)
      : shape_((detail::require_index(p, j), p.shape(j))),
        c_(p.c()),
        log_c_(p.log_c()),
        beta_(p.beta()),
        log_norm_(log_reg_lower_gamma(shape_, c_)) {}

  double shape() const { return shape_; }
  /// ln P(s, c): log-probability that the untruncated gamma lands in [0, 1].
  double log_normalizer() const { return log_norm_; }

  /// Inverse-CDF draw. `uniform` must lie strictly inside (0, 1); small
  /// uniforms give small radii, i.e. large U.
  double sample(double uniform) const {
    if (!(uniform > 0.0 && uniform < 1.0)) {
      throw DomainError("sample_radius_u: uniform must lie strictly inside (0,1)");
    }
    const double target = std::log(uniform) + log_norm_;
    const double w = detail::solve_log_p_in_log_x(shape_, target, log_c_);
    const double u = (log_c_ - w) / beta_;
    return u > 0.0 ? u : 0.0;
  }

  /// Prob[U <= t] = 1 - P(s, c e^{-β t}) / P(s, c).
  double cdf(double t) const {
    if (!(t >= 0.0)) throw DomainError("cdf_u: t must be non-negative");
    if (t == 0.0) return 0.0;
    if (std::isinf(t)) return 1.0;
    const double x = std::exp(log_c_ - beta_ * t);
    return -std::expm1(log_reg_lower_gamma(shape_, x) - log_norm_);
  }

  /// ln f(x) with f(x) = β y^s e^{-y} / (Γ(s) P(s, c)) and y = c e^{-β x}.
  double log_density(double x) const {
    if (!(x >= 0.0)) throw DomainError("density_u: x must be non-negative");
    const double y = std::exp(log_c_ - beta_ * x);
    return std::log(beta_) + std::log(shape_) + log_gamma_prefix(shape_, y) - log_norm_;
  }

  double density(double x) const { return std::exp(log_density(x)); }

  /// Gamma density of Y = c e^{-β U} = c R on (0, c]: y^{s-1} e^{-y} / (Γ(s) P(s, c)).
  double density_y(double y) const {
    if (y <= 0.0) return shape_ < 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return std::exp(std::log(shape_) + log_gamma_prefix(shape_, y) - std::log(y) - log_norm_);
  }

  double c() const { return c_; }
  double log_c() const { return log_c_; }
  double beta() const { return beta_; }

 private:
  double shape_, c_, log_c_, beta_, log_norm_;
};

/// Draws U_{n,j} from a uniform in (0, 1). Deterministic.
inline double sample_radius_u(const EnsembleParams& p, std::int64_t j, double uniform) {
  return ParticleLaw(p, j).sample(uniform);
}

/// Prob[U_{n,j} <= t]; t may be +inf.
inline double cdf_u(const EnsembleParams& p, std::int64_t j, double t) {
  return ParticleLaw(p, j).cdf(t);
}

/// Density of U_{n,j} at x >= 0.
inline double density_u(const EnsembleParams& p, std::int64_t j, double x) {
  return ParticleLaw(p, j).density(x);
}

/// Precomputed per-particle laws for repeated sampling of whole
/// configurations. Immutable and safe to share across threads.
class ConfigurationSampler {
 public:
  explicit ConfigurationSampler(const EnsembleParams& p) : params_(p) {
    laws_.reserve(static_cast<std::size_t>(p.n()));
    for (std::int64_t j = 1; j <= p.n(); ++j) laws_.emplace_back(p, j);
  }

  const EnsembleParams& params() const { return params_; }
  const ParticleLaw& law(std::int64_t j) const { return laws_.at(static_cast<std::size_t>(j - 1)); }

  /// Particle j of replicate `replicate` reads uniform 0 of stream (seed, replicate, j).
  double draw(std::uint64_t seed, std::uint64_t replicate, std::int64_t j) const {
    const UniformStream stream(seed, replicate, static_cast<std::uint64_t>(j));
    return law(j).sample(stream.uniform(0));
  }

  RadialConfiguration sample(std::uint64_t seed, std::uint64_t replicate = 0) const {
    RadialConfiguration cfg{{}, params_, seed};
    cfg.u.resize(laws_.size());
    for (std::int64_t j = 1; j <= params_.n(); ++j) {
      cfg.u[static_cast<std::size_t>(j - 1)] = draw(seed, replicate, j);
    }
    return cfg;
  }

 private:
  EnsembleParams params_;
  std::vector<ParticleLaw> laws_;
};

/// n independent draws, particle j using the counter-based stream (seed, 0, j).
inline RadialConfiguration sample_configuration(const EnsembleParams& p, std::uint64_t seed) {
  return ConfigurationSampler(p).sample(seed, 0);
}

/// Rate of the approximating exponential E_{n,j}: (b ρ^{2b} / κ)(θ - 1).
/// Only defined above the threshold θ > 1.
inline double exp_rate(const EnsembleParams& p, std::int64_t j) {
  const double th = theta(p, j);
  if (!(th > 1.0)) {
    throw PreconditionError("exp_rate: requires theta > 1 (particle " + std::to_string(j) +
                            " has theta = " + std::to_string(th) + ")");
  }
  return p.b() * p.rho2b() / p.kappa() * (th - 1.0);
}

/// Tilt w_n(x) = exp(-c (e^{-β x} - 1 + β x)) relating U_{n,j} to E_{n,j};
/// 0 < w <= 1 and w(0) = 1.
inline double weight_w(const EnsembleParams& p, double x) {
  if (!(x >= 0.0)) throw DomainError("weight_w: x must be non-negative");
  const double z = p.beta() * x;
  // e^{-z} - 1 + z
  const double g = z < 1e-3 ? z * z * (0.5 - z * (1.0 / 6.0 - z * (1.0 / 24.0 - z / 120.0)))
                            : std::expm1(-z) + z;
  return std::exp(-p.c() * g);
}

/// Upper bound 2 ∫ |1 - w_n| dP_E on the total variation distance between
/// U_{n,j} and its exponential approximation. Integrated in v = 1 - e^{-λx}.
inline double tv_upper_bound(const EnsembleParams& p, std::int64_t j) {
  const double rate = exp_rate(p, j);
  const double beta = p.beta();
  const double c = p.c();
  auto integrand = [&](double v) {
    const double x = -std::log1p(-v) / rate;
    const double z = beta * x;
    const double g = z < 1e-3 ? z * z * (0.5 - z * (1.0 / 6.0 - z * (1.0 / 24.0 - z / 120.0)))
                              : std::expm1(-z) + z;
    return -std::expm1(-c * g);
  };
  return 2.0 * integrate(integrand, 0.0, 1.0, {1e-13, 1e-10, 4000}).value;
}

/// ½ ∫ |f_U - f_E| by quadrature, using density_u directly.
inline double exact_tv(const EnsembleParams& p, std::int64_t j) {
  const double rate = exp_rate(p, j);
  const ParticleLaw law(p, j);
  // With x = -ln(1 - v)/λ the exponential density becomes λ(1 - v) and the
  // integrand |f_U / f_E - 1| stays bounded on (0, 1).
  auto integrand = [&](double v) {
    const double x = -std::log1p(-v) / rate;
    const double ratio = std::exp(law.log_density(x) - std::log(rate) - std::log1p(-v));
    return std::abs(ratio - 1.0);
  };
  return 0.5 * integrate(integrand, 0.0, 1.0, {1e-12, 1e-10, 8000}).value;
}

}  // namespace hardedge
