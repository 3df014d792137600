#pragma once

// Sample statistics with standard errors, used by the verification campaigns.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hardedge/errors.hpp"

namespace hardedge {

/// sup_x |F_emp(x) - F(x)| for a continuous reference CDF.
template <class Cdf>
double ks_statistic(std::span<const double> sample, Cdf&& cdf) {
  if (sample.empty()) throw PreconditionError("ks_statistic: empty sample");
  std::vector<double> xs(sample.begin(), sample.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

/// Mean and its standard error.
struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanEstimate mean_with_se(std::span<const double> x) {
  const std::size_t m = x.size();
  if (m < 2) throw PreconditionError("mean_with_se: need at least 2 observations");
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / static_cast<double>(m);
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(m - 1);
  return {mean, std::sqrt(var / static_cast<double>(m))};
}

/// Column-major sample matrix: columns[k][r] is coordinate k of replicate r.
using Columns = std::vector<std::vector<double>>;

/// Covariance of coordinates (a, b) around known centers (pass the means when
/// centering is empirical). The SE is the standard deviation of the products
/// divided by √M.
inline MeanEstimate covariance_entry(std::span<const double> a, std::span<const double> b,
                                     double center_a, double center_b) {
  if (a.size() != b.size()) throw PreconditionError("covariance_entry: length mismatch");
  std::vector<double> prod(a.size());
  for (std::size_t r = 0; r < a.size(); ++r) prod[r] = (a[r] - center_a) * (b[r] - center_b);
  return mean_with_se(prod);
}

/// Sample skewness g1 and excess kurtosis g2 of a column, with the usual
/// normal-theory standard errors.
struct ShapeEstimate {
  double skewness = 0.0;
  double skewness_se = 0.0;
  double excess_kurtosis = 0.0;
  double excess_kurtosis_se = 0.0;
};

inline ShapeEstimate shape_moments(std::span<const double> x) {
  const std::size_t m = x.size();
  if (m < 4) throw PreconditionError("shape_moments: need at least 4 observations");
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / static_cast<double>(m);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double nm = static_cast<double>(m);
  m2 /= nm;
  m3 /= nm;
  m4 /= nm;
  ShapeEstimate out;
  if (m2 > 0.0) {
    out.skewness = m3 / std::pow(m2, 1.5);
    out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  out.skewness_se = std::sqrt(6.0 * nm * (nm - 1.0) / ((nm - 2.0) * (nm + 1.0) * (nm + 3.0)));
  out.excess_kurtosis_se =
      2.0 * out.skewness_se * std::sqrt((nm * nm - 1.0) / ((nm - 3.0) * (nm + 5.0)));
  return out;
}

/// E[Π X_{i_k}] of a centered Gaussian vector with covariance `cov`, by summing
/// over perfect pairings (Isserlis). `idx` lists coordinates with repetition.
template <class Cov>
double isserlis_moment(std::vector<int> idx, Cov&& cov) {
  if (idx.empty()) return 1.0;
  if (idx.size() % 2 == 1) return 0.0;
  const int first = idx.front();
  double total = 0.0;
  for (std::size_t k = 1; k < idx.size(); ++k) {
    std::vector<int> rest;
    rest.reserve(idx.size() - 2);
    for (std::size_t i = 1; i < idx.size(); ++i) {
      if (i != k) rest.push_back(idx[i]);
    }
    total += cov(first, idx[k]) * isserlis_moment(std::move(rest), cov);
  }
  return total;
}

/// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("fit_slope: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw PreconditionError("fit_slope: x values are all equal");
  return sxy / sxx;
}

/// Slope of ln y against ln x.
inline double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("fit_loglog_slope: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_slope(lx, ly);
}

}  // namespace hardedge
