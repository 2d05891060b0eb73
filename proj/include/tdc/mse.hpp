#ifndef TDC_MSE_HPP
#define TDC_MSE_HPP

// Asymptotic mean squared error of the finite-threshold TDC estimators.
//
// Variances are the limiting n * Var divided by n. Single-threshold variances
// use sigma^2(alpha); averages over several thresholds use the covariance
// kernel K(u,v), with K(u,u) = sigma^2(u).

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tdc/copula.hpp"
#include "tdc/error.hpp"
#include "tdc/types.hpp"

namespace tdc {

struct MseDecomposition {
  double variance = 0.0;
  double bias_sq = 0.0;
  double total = 0.0;
  double alpha = 0.0;
  std::size_t n = 0;
};

/// Number of times a variance was clipped from a small negative round-off to 0.
inline std::atomic<std::uint64_t>& variance_clip_count() {
  static std::atomic<std::uint64_t> count{0};
  return count;
}

namespace detail {

inline double clip_variance(double v) {
  if (v < 0.0) {
    variance_clip_count().fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  return v;
}

inline MseDecomposition make_mse(double variance, double bias_sq, double alpha, std::size_t n) {
  return {variance, bias_sq, variance + bias_sq, alpha, n};
}

inline void check_n(std::size_t n) {
  if (n < 1) throw domain_error("sample size must be at least 1");
}

}  // namespace detail

/// sigma^2(alpha): limiting n * Var of C_n(alpha, alpha).
inline double sigma2(const CopulaModel& m, double alpha) {
  detail::check_open_unit(alpha, "alpha");
  const double d = diagonal(m, alpha);
  const double a = h1(m, alpha, alpha);
  const double b = h2(m, alpha, alpha);
  const double s = d * (1.0 - d) + (1.0 - alpha) * (alpha * (a * a + b * b) - 2.0 * d * (a + b)) +
                   2.0 * a * b * (d - alpha * alpha);
  return detail::clip_variance(s);
}

/// MSE of the lower estimator at alpha = i/n.
inline MseDecomposition mse_lower(const CopulaModel& m, std::size_t n, double alpha) {
  detail::check_n(n);
  const double s2 = sigma2(m, alpha);
  const double bias = diagonal(m, alpha) / alpha - tdc_lower(m);
  return detail::make_mse(s2 / (alpha * alpha) / static_cast<double>(n), bias * bias, alpha, n);
}

/// MSE of the upper estimator at alpha = i/n.
inline MseDecomposition mse_upper(const CopulaModel& m, std::size_t n, double alpha) {
  detail::check_n(n);
  const double s2 = sigma2(m, alpha);
  const double q = 1.0 - alpha;
  const double bias = (1.0 - 2.0 * alpha + diagonal(m, alpha)) / q - tdc_upper(m);
  return detail::make_mse(s2 / (static_cast<double>(n) * q * q), bias * bias, alpha, n);
}

inline MseDecomposition mse(const CopulaModel& m, std::size_t n, double alpha, Tail tail) {
  return tail == Tail::lower ? mse_lower(m, n, alpha) : mse_upper(m, n, alpha);
}

/// Closed form of mse_lower for the Clayton copula.
inline MseDecomposition mse_lower_clayton(double theta, std::size_t n, double alpha) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw domain_error("clayton theta must be > 0");
  detail::check_open_unit(alpha, "alpha");
  detail::check_n(n);
  const double at = std::pow(alpha, theta);
  const double g = 2.0 - at;
  const double d = alpha * std::pow(g, -1.0 / theta);
  const double bracket = 1.0 + 2.0 * (2.0 * (1.0 - alpha) * (1.0 - at) + 1.0) / (alpha * g * g);
  const double s2 = d - d * d * bracket + 2.0 * d * d * d / (alpha * alpha * g * g);
  const double bias = std::pow(g, -1.0 / theta) - std::exp2(-1.0 / theta);
  return detail::make_mse(detail::clip_variance(s2) / (static_cast<double>(n) * alpha * alpha),
                          bias * bias, alpha, n);
}

/// Closed form of mse_upper for the Gumbel copula.
inline MseDecomposition mse_upper_gumbel(double theta, std::size_t n, double alpha) {
  if (!(theta > 1.0) || !std::isfinite(theta)) throw domain_error("gumbel theta must be > 1");
  detail::check_open_unit(alpha, "alpha");
  detail::check_n(n);
  const double a = std::exp2(1.0 / theta);
  const double d = std::pow(alpha, a);
  const double s2 = d * (1.0 - d) + d * d * (1.0 / alpha - 1.0) * a * (0.5 * a - 2.0) +
                    d * d * 0.5 * a * a * (d / (alpha * alpha) - 1.0);
  const double q = 1.0 - alpha;
  const double bias = (1.0 - 2.0 * alpha + d) / q - 2.0 + a;
  return detail::make_mse(detail::clip_variance(s2) / (static_cast<double>(n) * q * q), bias * bias,
                          alpha, n);
}

/// Covariance kernel K(u,v): limiting n * Cov(C_n(u,u), C_n(v,v)).
inline double k_kernel(const CopulaModel& m, double u, double v) {
  detail::check_open_unit(u, "u");
  detail::check_open_unit(v, "v");
  const double w = std::min(u, v);
  const double du = diagonal(m, u);
  const double dv = diagonal(m, v);
  const double h1u = h1(m, u, u);
  const double h2u = h2(m, u, u);
  const double h1v = h1(m, v, v);
  const double h2v = h2(m, v, v);
  return diagonal(m, w) - du * dv + (h1u * h1v + h2u * h2v) * (w - u * v) -
         h1v * (cdf(m, w, u) - v * du) - h2v * (cdf(m, u, w) - v * du) -
         h1u * (cdf(m, w, v) - u * dv) - h2u * (cdf(m, v, w) - u * dv) +
         h1u * h2v * (cdf(m, u, v) - u * v) + h1v * h2u * (cdf(m, v, u) - u * v);
}

/// MSE of the average of the estimators at thresholds `alphas`. The upper tail
/// is the lower tail of the survival copula at 1 - alpha.
inline MseDecomposition mse_average(const CopulaModel& m, std::size_t n, std::span<const double> alphas,
                                    Tail tail = Tail::lower) {
  detail::check_n(n);
  if (alphas.empty()) throw domain_error("mse_average needs at least one threshold");
  const CopulaModel base = tail == Tail::lower ? m : CopulaModel::survival(m);
  std::vector<double> a(alphas.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    detail::check_open_unit(alphas[k], "alpha");
    a[k] = tail == Tail::lower ? alphas[k] : 1.0 - alphas[k];
  }
  const auto count = static_cast<double>(a.size());
  double var = 0.0;
  double mean_ratio = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    mean_ratio += diagonal(base, a[k]) / a[k];
    var += sigma2(base, a[k]) / (a[k] * a[k]);
    for (std::size_t l = k + 1; l < a.size(); ++l) var += 2.0 * k_kernel(base, a[k], a[l]) / (a[k] * a[l]);
  }
  mean_ratio /= count;
  const double bias = mean_ratio - tdc_lower(base);
  return detail::make_mse(detail::clip_variance(var) / (count * count) / static_cast<double>(n), bias * bias,
                          alphas.front(), n);
}

/// Asymptotic correlation between the lower estimators at ranks i and j.
inline double corr_rho(const CopulaModel& m, std::size_t n, std::size_t i, std::size_t j) {
  if (i < 1 || j < 1 || i >= n || j >= n) throw domain_error("corr_rho ranks must lie in [1, n-1]");
  const double u = static_cast<double>(i) / static_cast<double>(n);
  const double v = static_cast<double>(j) / static_cast<double>(n);
  const double su = sigma2(m, u);
  const double sv = sigma2(m, v);
  if (!(su > 0.0) || !(sv > 0.0)) throw domain_error("corr_rho: sigma vanishes");
  if (i == j) return 1.0;
  return k_kernel(m, u, v) / std::sqrt(su * sv);
}

}  // namespace tdc

#endif  // TDC_MSE_HPP
