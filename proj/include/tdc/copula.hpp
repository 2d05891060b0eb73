#ifndef TDC_COPULA_HPP
#define TDC_COPULA_HPP

// Parametric bivariate copula families (Clayton, Gumbel, Gaussian, Student t
// and the survival rotation of any of them) with the analytic quantities the
// MSE formulas and the censored likelihood consume.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tdc/detail/special.hpp"
#include "tdc/error.hpp"
#include "tdc/random.hpp"
#include "tdc/types.hpp"

namespace tdc {

enum class Family { clayton, gumbel, gaussian, student_t };

constexpr std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::clayton: return "clayton";
    case Family::gumbel: return "gumbel";
    case Family::gaussian: return "gaussian";
    case Family::student_t: return "student";
  }
  return "?";
}

/// Which closed form to use for the Clayton Kendall function.
///   archimedean: K(p) = p + p (1 - p^theta) / theta   (generator identity)
///   printed:     K(p) = p + p^2 (1 - p^theta) / theta
/// The default was settled by a Monte Carlo estimate of P[C(U,V) <= p]; see
/// tests/test_copula.cpp (KendallOracle).
enum class KendallVariant { archimedean, printed };

inline constexpr KendallVariant default_kendall_variant = KendallVariant::archimedean;

class CopulaModel {
 public:
  static CopulaModel clayton(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta))
      throw domain_error("clayton copula requires theta > 0");
    return CopulaModel(Family::clayton, theta, 0.0);
  }

  static CopulaModel gumbel(double theta) {
    if (!(theta > 1.0) || !std::isfinite(theta))
      throw domain_error("gumbel copula requires theta > 1");
    return CopulaModel(Family::gumbel, theta, 0.0);
  }

  static CopulaModel gaussian(double rho) {
    if (!(rho > -1.0 && rho < 1.0)) throw domain_error("gaussian copula requires rho in (-1,1)");
    return CopulaModel(Family::gaussian, rho, 0.0);
  }

  static CopulaModel student_t(double rho, double nu) {
    if (!(rho > -1.0 && rho < 1.0)) throw domain_error("student copula requires rho in (-1,1)");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw domain_error("student copula requires nu > 0");
    return CopulaModel(Family::student_t, rho, nu);
  }

  /// Survival rotation C'(u,v) = u + v - 1 + C(1-u, 1-v). Rotating twice
  /// gives back the inner model.
  static CopulaModel survival(const CopulaModel& inner) {
    CopulaModel m = inner;
    m.survival_ = !inner.survival_;
    return m;
  }

  Family family() const noexcept { return family_; }
  bool is_survival() const noexcept { return survival_; }

  /// The unrotated model.
  CopulaModel inner() const noexcept {
    CopulaModel m = *this;
    m.survival_ = false;
    return m;
  }

  /// Clayton / Gumbel parameter.
  double theta() const noexcept { return p1_; }
  double rho() const noexcept { return p1_; }
  double nu() const noexcept { return p2_; }

  bool is_archimedean() const noexcept {
    return family_ == Family::clayton || family_ == Family::gumbel;
  }

  std::string name() const {
    std::ostringstream os;
    os.precision(6);
    if (survival_) os << "survival-";
    switch (family_) {
      case Family::clayton: os << "clayton(theta=" << p1_ << ")"; break;
      case Family::gumbel: os << "gumbel(theta=" << p1_ << ")"; break;
      case Family::gaussian: os << "gaussian(rho=" << p1_ << ")"; break;
      case Family::student_t: os << "student(rho=" << p1_ << ",nu=" << p2_ << ")"; break;
    }
    return os.str();
  }

 private:
  CopulaModel(Family f, double p1, double p2) : family_(f), p1_(p1), p2_(p2) {}

  Family family_;
  double p1_;
  double p2_;
  bool survival_ = false;
};

namespace detail {

inline void check_unit(double u, const char* what) {
  if (!(u >= 0.0 && u <= 1.0)) throw domain_error(std::string(what) + " must lie in [0,1]");
}

inline void check_open_unit(double u, const char* what) {
  if (!(u > 0.0 && u < 1.0)) throw domain_error(std::string(what) + " must lie in (0,1)");
}

// ---- unrotated families -------------------------------------------------

inline double clayton_cdf(double t, double u, double v) {
  if (u == 0.0 || v == 0.0) return 0.0;
  // u^-t + v^-t - 1 written with expm1 to keep precision for small theta
  const double s = 1.0 + std::expm1(-t * std::log(u)) + std::expm1(-t * std::log(v));
  return std::exp(-std::log(s) / t);
}

inline double gumbel_cdf(double t, double u, double v) {
  if (u == 0.0 || v == 0.0) return 0.0;
  if (u == 1.0) return v;
  if (v == 1.0) return u;
  const double x = -std::log(u);
  const double y = -std::log(v);
  return std::exp(-std::pow(std::pow(x, t) + std::pow(y, t), 1.0 / t));
}

inline double clayton_h1(double t, double u, double v) {
  if (v == 0.0) return 0.0;
  if (v == 1.0) return 1.0;
  return std::pow(1.0 + std::expm1(-t * std::log(v)) * std::pow(u, t), -1.0 / t - 1.0);
}

inline double gumbel_h1(double t, double u, double v) {
  if (v == 0.0) return 0.0;
  if (v == 1.0) return 1.0;
  const double x = -std::log(u);
  const double y = -std::log(v);
  const double s = std::pow(x, t) + std::pow(y, t);
  const double c = std::exp(-std::pow(s, 1.0 / t));
  return c * std::pow(s, 1.0 / t - 1.0) * std::pow(x, t - 1.0) / u;
}

inline double gaussian_h1(double rho, double u, double v) {
  if (v == 0.0) return 0.0;
  if (v == 1.0) return 1.0;
  const double x = normal_quantile(u);
  const double y = normal_quantile(v);
  return normal_cdf((y - rho * x) / std::sqrt(1.0 - rho * rho));
}

inline double student_h1(double rho, double nu, double u, double v) {
  if (v == 0.0) return 0.0;
  if (v == 1.0) return 1.0;
  const double x = student_quantile(u, nu);
  const double y = student_quantile(v, nu);
  const double scale = std::sqrt((nu + x * x) * (1.0 - rho * rho) / (nu + 1.0));
  return student_cdf((y - rho * x) / scale, nu + 1.0);
}

inline double base_h1(const CopulaModel& m, double u, double v) {
  switch (m.family()) {
    case Family::clayton: return clayton_h1(m.theta(), u, v);
    case Family::gumbel: return gumbel_h1(m.theta(), u, v);
    case Family::gaussian: return gaussian_h1(m.rho(), u, v);
    case Family::student_t: return student_h1(m.rho(), m.nu(), u, v);
  }
  return 0.0;
}

inline double base_cdf(const CopulaModel& m, double u, double v) {
  if (u == 0.0 || v == 0.0) return 0.0;
  if (u == 1.0) return v;
  if (v == 1.0) return u;
  switch (m.family()) {
    case Family::clayton: return clayton_cdf(m.theta(), u, v);
    case Family::gumbel: return gumbel_cdf(m.theta(), u, v);
    case Family::gaussian:
      if (m.rho() == 0.0) return u * v;
      return bvn_cdf(normal_quantile(u), normal_quantile(v), m.rho());
    case Family::student_t: {
      // C(u,v) = int_{-inf}^{x_u} t_nu(x) P[Y <= y | X = x] dx on the t scale
      const double rho = m.rho();
      const double nu = m.nu();
      const double xu = student_quantile(u, nu);
      const double y = student_quantile(v, nu);
      const double value = integrate_lower_tail(
          [&](double x) {
            const double scale = std::sqrt((nu + x * x) * (1.0 - rho * rho) / (nu + 1.0));
            return std::exp(student_log_pdf(x, nu)) * student_cdf((y - rho * x) / scale, nu + 1.0);
          },
          xu);
      return std::clamp(value, std::max(0.0, u + v - 1.0), std::min(u, v));
    }
  }
  return 0.0;
}

inline double base_log_density(const CopulaModel& m, double u, double v) {
  switch (m.family()) {
    case Family::clayton: {
      const double t = m.theta();
      const double lu = std::log(u);
      const double lv = std::log(v);
      const double s = 1.0 + std::expm1(-t * lu) + std::expm1(-t * lv);
      return std::log1p(t) - (t + 1.0) * (lu + lv) - (2.0 + 1.0 / t) * std::log(s);
    }
    case Family::gumbel: {
      const double t = m.theta();
      const double x = -std::log(u);
      const double y = -std::log(v);
      const double lx = std::log(x);
      const double ly = std::log(y);
      const double s = std::exp(t * lx) + std::exp(t * ly);
      const double ls = std::log(s);
      const double a = std::exp(ls / t);
      return -a + x + y + (t - 1.0) * (lx + ly) + (1.0 / t - 2.0) * ls + std::log(a + t - 1.0);
    }
    case Family::gaussian: {
      const double r = m.rho();
      const double x = normal_quantile(u);
      const double y = normal_quantile(v);
      const double q = 1.0 - r * r;
      return -0.5 * std::log(q) - (r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * q);
    }
    case Family::student_t: {
      const double r = m.rho();
      const double nu = m.nu();
      const double x = student_quantile(u, nu);
      const double y = student_quantile(v, nu);
      const double q = 1.0 - r * r;
      const double joint = std::lgamma(0.5 * (nu + 2.0)) - std::lgamma(0.5 * nu) -
                           std::log(nu * std::numbers::pi) - 0.5 * std::log(q) -
                           0.5 * (nu + 2.0) * std::log1p((x * x - 2.0 * r * x * y + y * y) / (nu * q));
      return joint - student_log_pdf(x, nu) - student_log_pdf(y, nu);
    }
  }
  return 0.0;
}

inline double base_diagonal(const CopulaModel& m, double u) {
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;
  switch (m.family()) {
    case Family::clayton: {
      const double t = m.theta();
      return u * std::pow(2.0 - std::pow(u, t), -1.0 / t);
    }
    case Family::gumbel: return std::pow(u, std::exp2(1.0 / m.theta()));
    default: return base_cdf(m, u, u);
  }
}

inline double base_tdc_lower(const CopulaModel& m) {
  switch (m.family()) {
    case Family::clayton: return std::exp2(-1.0 / m.theta());
    case Family::gumbel: return 0.0;
    case Family::gaussian: return 0.0;
    case Family::student_t: {
      const double nu = m.nu();
      const double r = m.rho();
      return 2.0 * student_cdf(-std::sqrt((nu + 1.0) * (1.0 - r) / (1.0 + r)), nu + 1.0);
    }
  }
  return 0.0;
}

inline double base_tdc_upper(const CopulaModel& m) {
  switch (m.family()) {
    case Family::clayton: return 0.0;
    case Family::gumbel: return 2.0 - std::exp2(1.0 / m.theta());
    default: return base_tdc_lower(m);
  }
}

}  // namespace detail

// ---- public operations ------------------------------------------------------

/// Copula distribution function C(u,v).
inline double cdf(const CopulaModel& m, double u, double v) {
  detail::check_unit(u, "u");
  detail::check_unit(v, "v");
  if (m.is_survival()) {
    const double c = detail::base_cdf(m.inner(), 1.0 - u, 1.0 - v);
    return std::clamp(u + v - 1.0 + c, 0.0, 1.0);
  }
  return detail::base_cdf(m, u, v);
}

/// Natural log of the copula density on the open square.
inline double log_density(const CopulaModel& m, double u, double v) {
  detail::check_open_unit(u, "u");
  detail::check_open_unit(v, "v");
  if (m.is_survival()) return detail::base_log_density(m.inner(), 1.0 - u, 1.0 - v);
  return detail::base_log_density(m, u, v);
}

/// Copula density c(u,v) = d^2 C / du dv on the open square.
inline double density(const CopulaModel& m, double u, double v) {
  return std::exp(log_density(m, u, v));
}

/// Conditional distribution h1(u,v) = dC/du (u,v) = P[V <= v | U = u].
inline double h1(const CopulaModel& m, double u, double v) {
  detail::check_open_unit(u, "u");
  detail::check_unit(v, "v");
  if (m.is_survival()) return 1.0 - detail::base_h1(m.inner(), 1.0 - u, 1.0 - v);
  return detail::base_h1(m, u, v);
}

/// h2(u,v) = dC/dv (u,v). All supported families are exchangeable.
inline double h2(const CopulaModel& m, double u, double v) { return h1(m, v, u); }

/// Central finite difference of the cdf in its first argument (one-sided near
/// the boundary). Independent cross-check of h1.
inline double h1_fd(const CopulaModel& m, double u, double v, double step = 1e-6) {
  detail::check_open_unit(u, "u");
  const double lo = std::max(0.0, u - step);
  const double hi = std::min(1.0, u + step);
  return (cdf(m, hi, v) - cdf(m, lo, v)) / (hi - lo);
}

inline double h2_fd(const CopulaModel& m, double u, double v, double step = 1e-6) {
  detail::check_open_unit(v, "v");
  const double lo = std::max(0.0, v - step);
  const double hi = std::min(1.0, v + step);
  return (cdf(m, u, hi) - cdf(m, u, lo)) / (hi - lo);
}

/// Diagonal section delta(u) = C(u,u).
inline double diagonal(const CopulaModel& m, double u) {
  detail::check_unit(u, "u");
  if (m.is_survival()) return std::clamp(2.0 * u - 1.0 + detail::base_diagonal(m.inner(), 1.0 - u), 0.0, 1.0);
  return detail::base_diagonal(m, u);
}

/// delta'(u) in closed form. Available for Clayton, Gumbel and their survival
/// rotations, on the closed interval [0,1].
inline double diagonal_derivative(const CopulaModel& m, double u) {
  detail::check_unit(u, "u");
  if (!m.is_archimedean())
    throw unsupported_family("diagonal_derivative: no closed form for " + m.name());
  if (m.is_survival()) return 2.0 - diagonal_derivative(m.inner(), 1.0 - u);
  const double t = m.theta();
  if (m.family() == Family::clayton) return 2.0 * std::pow(2.0 - std::pow(u, t), -1.0 - 1.0 / t);
  const double a = std::exp2(1.0 / t);
  return a * std::pow(u, a - 1.0);
}

/// h(u) = h1(u,u) = h2(u,u) for the symmetric families with closed-form
/// diagonal derivative: h(u) = delta'(u) / 2.
inline double h_diag(const CopulaModel& m, double u) {
  detail::check_open_unit(u, "u");
  if (!m.is_archimedean()) throw unsupported_family("h_diag: no closed form for " + m.name());
  if (m.is_survival()) return 1.0 - h_diag(m.inner(), 1.0 - u);
  const double t = m.theta();
  if (m.family() == Family::clayton) return std::pow(2.0 - std::pow(u, t), -1.0 - 1.0 / t);
  return detail::base_diagonal(m, u) / u * std::exp2(1.0 / t - 1.0);
}

/// Kendall distribution function K(p) = P[C(U,V) <= p] for Clayton and Gumbel.
inline double kendall(const CopulaModel& m, double p,
                      KendallVariant variant = default_kendall_variant) {
  if (!m.is_archimedean() || m.is_survival())
    throw unsupported_family("kendall: closed form only for clayton and gumbel, got " + m.name());
  if (!(p > 0.0 && p <= 1.0)) throw domain_error("kendall: p must lie in (0,1]");
  const double t = m.theta();
  const double lp = std::log(p);
  if (m.family() == Family::gumbel) return p - p * lp / t;
  const double one_minus = -std::expm1(t * lp);  // 1 - p^theta
  const double lead = variant == KendallVariant::archimedean ? p : p * p;
  return p + lead * one_minus / t;
}

/// Lower tail dependence coefficient lim_{u->0} C(u,u)/u.
inline double tdc_lower(const CopulaModel& m) {
  return m.is_survival() ? detail::base_tdc_upper(m.inner()) : detail::base_tdc_lower(m);
}

/// Upper tail dependence coefficient lim_{u->1} (1 - 2u + C(u,u)) / (1 - u).
inline double tdc_upper(const CopulaModel& m) {
  return m.is_survival() ? detail::base_tdc_lower(m.inner()) : detail::base_tdc_upper(m);
}

inline double tdc(const CopulaModel& m, Tail tail) {
  return tail == Tail::lower ? tdc_lower(m) : tdc_upper(m);
}

namespace detail {

inline Point base_draw(const CopulaModel& m, RandomStream& rng) {
  switch (m.family()) {
    case Family::clayton: {
      // conditional inversion: v = h1^{-1}(w | u)
      const double t = m.theta();
      const double u = rng.uniform();
      const double w = rng.uniform();
      const double a = std::expm1(-t / (1.0 + t) * std::log(w));  // w^{-t/(1+t)} - 1
      const double v = std::exp(-std::log1p(a * std::exp(-t * std::log(u))) / t);
      return {u, v};
    }
    case Family::gumbel: {
      // Marshall-Olkin frailty: U_i = exp(-(E_i / S)^{1/theta}), S positive stable(1/theta)
      const double alpha = 1.0 / m.theta();
      const double s = rng.positive_stable(alpha);
      const double e1 = rng.exponential();
      const double e2 = rng.exponential();
      return {std::exp(-std::pow(e1 / s, alpha)), std::exp(-std::pow(e2 / s, alpha))};
    }
    case Family::gaussian: {
      const double r = m.rho();
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      return {normal_cdf(z1), normal_cdf(r * z1 + std::sqrt(1.0 - r * r) * z2)};
    }
    case Family::student_t: {
      const double r = m.rho();
      const double nu = m.nu();
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      const double w = std::sqrt(rng.chi_squared(nu) / nu);
      const double x = z1 / w;
      const double y = (r * z1 + std::sqrt(1.0 - r * r) * z2) / w;
      return {student_cdf(x, nu), student_cdf(y, nu)};
    }
  }
  return {};
}

}  // namespace detail

/// Draw one pair with copula `m` and uniform margins.
inline Point draw(const CopulaModel& m, RandomStream& rng) {
  const Point p = detail::base_draw(m.inner(), rng);
  if (m.is_survival()) return {1.0 - p.x, 1.0 - p.y};
  return p;
}

/// n i.i.d. pairs with copula `m` and uniform margins.
inline std::vector<Point> sample(const CopulaModel& m, std::size_t n, RandomStream& rng) {
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw(m, rng));
  return out;
}

inline CopulaModel make_survival(const CopulaModel& inner) { return CopulaModel::survival(inner); }

}  // namespace tdc

#endif  // TDC_COPULA_HPP
