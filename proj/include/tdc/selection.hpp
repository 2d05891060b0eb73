#ifndef TDC_SELECTION_HPP
#define TDC_SELECTION_HPP

// Threshold selection for the nonparametric TDC estimators.
//
//   fixed1pct / fixed2pct  arbitrary 1% / 2% tail threshold
//   mle                    full-sample pseudo-likelihood of a parametric family
//   plateau                smoothed-plateau heuristic
//   plugin                 argmin_i MSE(i, C_psi(i/n))
//   twostep                crossing of psi(i/n) and phi^{-1}(i/n)
//   avg_minavg / avg_joint the same two ideas for the average estimator over
//                          m consecutive ranks
//
// psi(i/n) is the censored-likelihood estimate of the tail copula parameter at
// threshold i; phi(theta) is the threshold minimizing the theoretical MSE when
// the copula is the family member with parameter theta.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "tdc/copula.hpp"
#include "tdc/empirical.hpp"
#include "tdc/error.hpp"
#include "tdc/mse.hpp"
#include "tdc/optimize.hpp"
#include "tdc/types.hpp"

namespace tdc {

enum class Method { fixed1pct, fixed2pct, mle, plateau, plugin, twostep, avg_minavg, avg_joint };

inline constexpr std::array<Method, 8> all_methods{Method::fixed1pct, Method::fixed2pct, Method::mle,
                                                   Method::plateau,   Method::plugin,    Method::twostep,
                                                   Method::avg_minavg, Method::avg_joint};

constexpr std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::fixed1pct: return "fixed1pct";
    case Method::fixed2pct: return "fixed2pct";
    case Method::mle: return "mle";
    case Method::plateau: return "plateau";
    case Method::plugin: return "plugin";
    case Method::twostep: return "twostep";
    case Method::avg_minavg: return "avg_minavg";
    case Method::avg_joint: return "avg_joint";
  }
  return "?";
}

/// Accepts a method name or its table number ("1".."6"; "7" and "8" are the
/// two average-estimator selectors).
inline Method parse_method(std::string_view text) {
  for (std::size_t k = 0; k < all_methods.size(); ++k) {
    if (text == to_string(all_methods[k]) || text == std::to_string(k + 1)) return all_methods[k];
  }
  throw std::invalid_argument("unknown method '" + std::string(text) + "'");
}

struct ThresholdRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t size() const noexcept { return hi >= lo ? hi - lo + 1 : 0; }
};

struct SelectionConfig {
  /// Parametric family for psi/phi and for the mle method; defaults to Clayton
  /// for the lower tail and Gumbel for the upper tail.
  std::optional<Family> family;
  KendallVariant kendall = default_kendall_variant;
  /// Fewest extreme observations for which psi is attempted.
  std::size_t min_extreme = 5;
  double lower_lo_frac = 0.002;
  double lower_hi_frac = 0.5;
  double upper_lo_frac = 0.5;
  std::size_t upper_hi_gap = 2;
  /// Interval length of the average estimators; 0 means the plateau length.
  std::size_t average_m = 0;
};

inline Family plugin_family(const SelectionConfig& cfg, Tail tail) {
  if (cfg.family) return *cfg.family;
  return tail == Tail::lower ? Family::clayton : Family::gumbel;
}

/// Legal ranks for the plug-in searches.
inline ThresholdRange search_range(std::size_t n, Tail tail, const SelectionConfig& cfg = {}) {
  const auto nd = static_cast<double>(n);
  ThresholdRange r;
  if (tail == Tail::lower) {
    r.lo = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(cfg.lower_lo_frac * nd)));
    r.hi = static_cast<std::size_t>(std::floor(cfg.lower_hi_frac * nd));
  } else {
    r.lo = static_cast<std::size_t>(std::ceil(cfg.upper_lo_frac * nd));
    r.hi = n > cfg.upper_hi_gap ? n - cfg.upper_hi_gap : 0;
  }
  if (r.lo > r.hi || r.lo < 1) throw domain_error("empty threshold search range for n = " + std::to_string(n));
  return r;
}

struct CrossingPoint {
  std::size_t rank = 0;
  double psi = 0.0;
  double phi_inverse = 0.0;
};

struct Diagnostics {
  /// (rank, estimated MSE) for every non-degenerate candidate.
  std::vector<std::pair<std::size_t, double>> mse_curve;
  /// psi and phi^{-1} at every rank the two-step search evaluated.
  std::vector<CrossingPoint> crossing;
  std::size_t skipped = 0;
  std::size_t evaluations = 0;
  bool clamped = false;
  bool fallback = false;
  bool no_plateau = false;
};

struct SelectionResult {
  Method method = Method::fixed1pct;
  Tail tail = Tail::lower;
  /// Chosen rank, or the first rank of the interval for interval methods.
  std::optional<std::size_t> threshold;
  std::size_t length = 1;
  double estimate = 0.0;
  std::optional<double> theta_hat;
  Diagnostics diagnostics;
};

// ---- plateau ----------------------------------------------------------------

struct PlateauConfig {
  std::size_t b = 0;
  std::size_t m = 1;
  double tolerance = 2.0;

  /// b = floor(n/200), m = floor(sqrt(n - 2b)).
  static PlateauConfig for_size(std::size_t n) {
    PlateauConfig c;
    c.b = n / 200;
    const std::size_t rest = n > 2 * c.b ? n - 2 * c.b : 0;
    c.m = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(rest)))));
    return c;
  }
};

/// Plateau-finding estimate from a threshold-indexed series (element k is the
/// estimate at rank k+1). The series is smoothed by a box kernel of width
/// 2b+1; the first window of m smoothed values whose summed absolute deviation
/// from its first value is <= tolerance * sd(smoothed) is averaged. The scan
/// runs upward for the lower tail and downward for the upper tail. No plateau
/// gives the estimate 0.
inline SelectionResult plateau_estimate(std::span<const double> series, Tail tail,
                                        std::optional<PlateauConfig> config = std::nullopt) {
  const PlateauConfig cfg = config.value_or(PlateauConfig::for_size(series.size()));
  if (series.size() < 2 * cfg.b + 1) throw domain_error("plateau series shorter than 2b+1");
  const std::size_t len = series.size() - 2 * cfg.b;
  if (cfg.m < 1 || cfg.m > len) throw domain_error("plateau length m does not fit the smoothed series");

  std::vector<double> smooth(len);
  double window = 0.0;
  for (std::size_t k = 0; k < 2 * cfg.b + 1; ++k) window += series[k];
  const auto width = static_cast<double>(2 * cfg.b + 1);
  for (std::size_t k = 0; k < len; ++k) {
    if (k > 0) window += series[k + 2 * cfg.b] - series[k - 1];
    smooth[k] = window / width;
  }
  // recompute exactly to avoid drift of the running sum
  for (std::size_t k = 0; k < len; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < 2 * cfg.b + 1; ++j) s += series[k + j];
    smooth[k] = s / width;
  }

  double mean = 0.0;
  for (double x : smooth) mean += x;
  mean /= static_cast<double>(len);
  double var = 0.0;
  for (double x : smooth) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(len));

  SelectionResult res;
  res.method = Method::plateau;
  res.tail = tail;
  res.length = cfg.m;
  const std::size_t starts = len - cfg.m + 1;
  for (std::size_t step = 0; step < starts; ++step) {
    const std::size_t k = tail == Tail::lower ? step : starts - 1 - step;
    double dev = 0.0;
    for (std::size_t j = 1; j < cfg.m; ++j) dev += std::abs(smooth[k + j] - smooth[k]);
    ++res.diagnostics.evaluations;
    if (dev <= cfg.tolerance * sd) {
      double s = 0.0;
      for (std::size_t j = 0; j < cfg.m; ++j) s += smooth[k + j];
      res.estimate = std::clamp(s / static_cast<double>(cfg.m), 0.0, 1.0);
      res.threshold = k + cfg.b + 1;
      return res;
    }
  }
  res.estimate = 0.0;
  res.diagnostics.no_plateau = true;
  return res;
}

// ---- censored likelihood ----------------------------------------------------

namespace detail {

inline CopulaModel family_model(Family f, double theta) {
  switch (f) {
    case Family::clayton: return CopulaModel::clayton(theta);
    case Family::gumbel: return CopulaModel::gumbel(theta);
    default: throw unsupported_family("censored likelihood needs clayton or gumbel, got " + std::string(to_string(f)));
  }
}

inline void check_plugin_family(Family f) {
  if (f != Family::clayton && f != Family::gumbel)
    throw unsupported_family("plug-in selection needs clayton or gumbel, got " + std::string(to_string(f)));
}

/// Pseudo-coordinate fed to the density: rank/n, except that the maximal rank
/// n maps to (n - 1/2)/n so the density stays finite.
inline double density_coordinate(std::uint32_t rank, std::size_t n) {
  const auto nd = static_cast<double>(n);
  return rank == n ? (nd - 0.5) / nd : static_cast<double>(rank) / nd;
}

}  // namespace detail

/// Censored log-likelihood of a Clayton or Gumbel tail model at threshold rank
/// i. Extreme observations (see extreme_set) contribute log c_theta at their
/// pseudo-coordinates; every other observation contributes log(1 - K(cut))
/// (lower tail) or log K(cut) (upper tail), cut = C_n(i/n, i/n).
class CensoredLikelihood {
 public:
  CensoredLikelihood(const PseudoSample& s, std::size_t i, Tail tail, Family family,
                     KendallVariant variant = default_kendall_variant)
      : family_(family), tail_(tail), variant_(variant) {
    detail::check_plugin_family(family);
    if (i < 1 || i > s.size()) throw domain_error("censored likelihood rank outside [1, n]");
    cut_ = empirical_diagonal(s, i);
    const std::size_t cut_count = s.diagonal_count(i);
    for (std::size_t j = 0; j < s.size(); ++j) {
      const std::size_t f = s.orthant_count(j);
      if (tail == Tail::lower ? f <= cut_count : f >= cut_count)
        add_point(s, j);
      else
        ++censored_;
    }
  }

  /// Uncensored pseudo-likelihood over the whole sample.
  static CensoredLikelihood full(const PseudoSample& s, Family family) {
    CensoredLikelihood l(family);
    for (std::size_t j = 0; j < s.size(); ++j) l.add_point(s, j);
    l.cut_ = 1.0;
    return l;
  }

  std::size_t extreme_count() const noexcept { return lu_.size(); }
  std::size_t censored_count() const noexcept { return censored_; }
  double cut() const noexcept { return cut_; }
  Family family() const noexcept { return family_; }

  double operator()(double theta) const {
    const auto model = detail::family_model(family_, theta);  // validates theta
    double total = 0.0;
    if (family_ == Family::clayton) {
      const double a = std::log1p(theta);
      const double b = theta + 1.0;
      const double c = 2.0 + 1.0 / theta;
      for (std::size_t k = 0; k < lu_.size(); ++k) {
        const double s = 1.0 + std::expm1(-theta * lu_[k]) + std::expm1(-theta * lv_[k]);
        total += a - b * (lu_[k] + lv_[k]) - c * std::log(s);
      }
    } else {
      const double inv = 1.0 / theta;
      for (std::size_t k = 0; k < lu_.size(); ++k) {
        // log s = theta*max + log1p(exp(theta*(min - max))) with s = x^theta + y^theta
        const double hi = std::max(lx_[k], ly_[k]);
        const double lo = std::min(lx_[k], ly_[k]);
        const double ls = theta * hi + std::log1p(std::exp(theta * (lo - hi)));
        const double a = std::exp(ls * inv);
        total += -a + sx_[k] + (theta - 1.0) * (lx_[k] + ly_[k]) + (inv - 2.0) * ls + std::log(a + theta - 1.0);
      }
    }
    if (censored_ > 0) {
      double mass = 0.0;
      if (tail_ == Tail::lower) {
        mass = cut_ <= 0.0 ? 1.0 : 1.0 - kendall(model, cut_, variant_);
      } else {
        mass = cut_ <= 0.0 ? 0.0 : kendall(model, cut_, variant_);
      }
      if (!(mass > 0.0)) return -std::numeric_limits<double>::infinity();
      total += static_cast<double>(censored_) * std::log(mass);
    }
    return std::isnan(total) ? -std::numeric_limits<double>::infinity() : total;
  }

 private:
  explicit CensoredLikelihood(Family family) : family_(family), tail_(Tail::lower) {
    detail::check_plugin_family(family);
  }

  void add_point(const PseudoSample& s, std::size_t j) {
    const double u = detail::density_coordinate(s.rank_x(j), s.size());
    const double v = detail::density_coordinate(s.rank_y(j), s.size());
    lu_.push_back(std::log(u));
    lv_.push_back(std::log(v));
    if (family_ == Family::gumbel) {
      const double x = -lu_.back();
      const double y = -lv_.back();
      lx_.push_back(std::log(x));
      ly_.push_back(std::log(y));
      sx_.push_back(x + y);
    }
  }

  Family family_;
  Tail tail_;
  KendallVariant variant_ = default_kendall_variant;
  double cut_ = 0.0;
  std::size_t censored_ = 0;
  std::vector<double> lu_, lv_, lx_, ly_, sx_;
};

inline double censored_loglik(const PseudoSample& s, std::size_t i, Tail tail, Family family, double theta,
                              KendallVariant variant = default_kendall_variant) {
  return CensoredLikelihood(s, i, tail, family, variant)(theta);
}

namespace detail {

// Parameter maps used by the psi search: Clayton t = ln theta, Gumbel
// t = ln(theta - 1).
inline double theta_of(Family f, double t) { return f == Family::clayton ? std::exp(t) : 1.0 + std::exp(t); }

inline std::pair<double, double> search_bounds(Family f) {
  return f == Family::clayton ? std::pair{std::log(1e-3), std::log(50.0)} : std::pair{std::log(1e-6), std::log(49.0)};
}

template <class L>
double maximize_theta(const L& loglik, Family family, double tol) {
  constexpr std::size_t grid = 25;
  const auto [t_lo, t_hi] = search_bounds(family);
  const double step = (t_hi - t_lo) / static_cast<double>(grid - 1);
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid; ++k) {
    const double v = loglik(theta_of(family, t_lo + step * static_cast<double>(k)));
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  if (!std::isfinite(best_value)) throw degenerate_likelihood("censored likelihood is -inf over the whole parameter range");
  const double a = t_lo + step * static_cast<double>(best > 0 ? best - 1 : 0);
  const double b = t_lo + step * static_cast<double>(std::min(best + 1, grid - 1));
  const double scale = family == Family::clayton ? std::exp(b) : std::exp(b);
  const auto res = golden_section([&](double t) { return -loglik(theta_of(family, t)); }, a, b, tol / scale);
  if (-res.value >= best_value) return theta_of(family, res.x);
  return theta_of(family, t_lo + step * static_cast<double>(best));
}

}  // namespace detail

/// psi(i/n): maximizer of the censored likelihood at threshold rank i.
inline double psi(const PseudoSample& s, std::size_t i, Tail tail, Family family, const SelectionConfig& cfg = {}) {
  const CensoredLikelihood l(s, i, tail, family, cfg.kendall);
  if (l.extreme_count() < std::max<std::size_t>(cfg.min_extreme, 1))
    throw degenerate_likelihood("only " + std::to_string(l.extreme_count()) + " extreme observations at rank " +
                                std::to_string(i));
  return detail::maximize_theta(l, family, 1e-6);
}

/// Full-sample pseudo maximum likelihood estimate of the family parameter.
inline double pseudo_mle(const PseudoSample& s, Family family) {
  return detail::maximize_theta(CensoredLikelihood::full(s, family), family, 1e-6);
}

/// psi memoized over ranks for one sample; degenerate ranks are remembered as
/// empty. Not thread safe; one instance per sample and caller.
class PsiCache {
 public:
  PsiCache(const PseudoSample& s, Tail tail, Family family, const SelectionConfig& cfg)
      : sample_(&s), tail_(tail), family_(family), cfg_(cfg), state_(s.size() + 1, 0), value_(s.size() + 1, 0.0) {}

  std::optional<double> operator()(std::size_t i) {
    if (i < 1 || i > sample_->size()) return std::nullopt;
    if (state_[i] == 0) {
      try {
        value_[i] = psi(*sample_, i, tail_, family_, cfg_);
        state_[i] = 1;
      } catch (const degenerate_likelihood&) {
        state_[i] = 2;
      }
      ++evaluations_;
    }
    if (state_[i] == 2) return std::nullopt;
    return value_[i];
  }

  std::size_t evaluations() const noexcept { return evaluations_; }
  Tail tail() const noexcept { return tail_; }
  Family family() const noexcept { return family_; }

 private:
  const PseudoSample* sample_;
  Tail tail_;
  Family family_;
  SelectionConfig cfg_;
  std::vector<std::uint8_t> state_;
  std::vector<double> value_;
  std::size_t evaluations_ = 0;
};

// ---- theoretical MSE at a plug-in parameter ---------------------------------

/// MSE of the single estimator at rank i when the copula is family(theta):
/// closed forms for Clayton/lower and Gumbel/upper, the generic path otherwise.
inline MseDecomposition plugin_mse(Family family, double theta, std::size_t n, std::size_t i, Tail tail) {
  const double a = static_cast<double>(i) / static_cast<double>(n);
  if (tail == Tail::lower && family == Family::clayton) return mse_lower_clayton(theta, n, a);
  if (tail == Tail::upper && family == Family::gumbel) return mse_upper_gumbel(theta, n, a);
  return mse(detail::family_model(family, theta), n, a, tail);
}

namespace detail {

// Per-rank quantities entering K(u,v) for an exchangeable copula.
struct KernelPoint {
  double a = 0.0;
  double d = 0.0;
  double h = 0.0;
};

inline KernelPoint kernel_point(const CopulaModel& m, double a) { return {a, diagonal(m, a), h1(m, a, a)}; }

// K(u,v) for exchangeable C (h1 = h2 on the diagonal, C(u,v) = C(v,u)), u < v.
inline double kernel_exchangeable(const CopulaModel& m, const KernelPoint& p, const KernelPoint& q) {
  const double c = cdf(m, p.a, q.a);
  return p.d - p.d * q.d + 2.0 * p.h * q.h * (p.a - p.a * q.a) - 2.0 * q.h * (p.d - q.a * p.d) -
         2.0 * p.h * (c - p.a * q.d) + 2.0 * p.h * q.h * (c - p.a * q.a);
}

/// Variance and squared bias of the average estimator over every interval of m
/// consecutive ranks in [lo, hi], for copula `model`.
inline std::vector<std::pair<double, double>> interval_mse(const CopulaModel& model, std::size_t n, Tail tail,
                                                           ThresholdRange range, std::size_t m) {
  const CopulaModel base = tail == Tail::lower ? model : CopulaModel::survival(model);
  const std::size_t g = range.size();
  std::vector<KernelPoint> pts(g);
  std::vector<double> ratio(g);
  for (std::size_t k = 0; k < g; ++k) {
    const double r = static_cast<double>(range.lo + k) / static_cast<double>(n);
    const double a = tail == Tail::lower ? r : 1.0 - r;
    pts[k] = kernel_point(base, a);
    ratio[k] = pts[k].d / a;
  }
  // band[k][d] = K(a_k, a_{k+d}) / (a_k a_{k+d}) for d < m
  std::vector<double> band(g * m, 0.0);
  for (std::size_t k = 0; k < g; ++k) {
    band[k * m] = sigma2(base, pts[k].a) / (pts[k].a * pts[k].a);
    for (std::size_t d = 1; d < m && k + d < g; ++d) {
      const auto& p = pts[k];
      const auto& q = pts[k + d];
      const bool ordered = p.a < q.a;
      const double kv = ordered ? kernel_exchangeable(base, p, q) : kernel_exchangeable(base, q, p);
      band[k * m + d] = kv / (p.a * q.a);
    }
  }
  const double lambda = tdc_lower(base);
  const auto count = static_cast<double>(m);
  std::vector<std::pair<double, double>> out;
  out.reserve(g - m + 1);
  for (std::size_t s = 0; s + m <= g; ++s) {
    double var = 0.0;
    double mean_ratio = 0.0;
    for (std::size_t k = s; k < s + m; ++k) {
      mean_ratio += ratio[k];
      var += band[k * m];
      for (std::size_t l = k + 1; l < s + m; ++l) var += 2.0 * band[k * m + (l - k)];
    }
    mean_ratio /= count;
    const double bias = mean_ratio - lambda;
    out.emplace_back(std::max(var, 0.0) / (count * count) / static_cast<double>(n), bias * bias);
  }
  return out;
}

}  // namespace detail

// ---- phi and its generalized inverse ----------------------------------------

/// phi(theta) = (1/n) argmin over interval starts of the theoretical MSE of the
/// (average) estimator, tabulated on a log-spaced theta grid for inversion.
/// m = 1 gives the single-threshold map. Thread safe.
class PhiMap {
 public:
  static constexpr std::size_t grid_size = 60;

  PhiMap(Family family, std::size_t n, Tail tail, ThresholdRange range, std::size_t m = 1)
      : family_(family), n_(n), tail_(tail), range_(range), m_(m) {
    detail::check_plugin_family(family);
    if (m_ < 1 || m_ > range_.size()) throw domain_error("phi: interval length does not fit the search range");
    const auto [t_lo, t_hi] = detail::search_bounds(family);
    thetas_.resize(grid_size);
    raw_.resize(grid_size);
    for (std::size_t k = 0; k < grid_size; ++k) {
      const double t = t_lo + (t_hi - t_lo) * static_cast<double>(k) / static_cast<double>(grid_size - 1);
      thetas_[k] = detail::theta_of(family, t);
      raw_[k] = static_cast<double>(argmin_start(thetas_[k]));
    }
    increasing_ = raw_.back() >= raw_.front();
    repaired_ = isotonic(raw_, increasing_);
  }

  Family family() const noexcept { return family_; }
  std::size_t n() const noexcept { return n_; }
  Tail tail() const noexcept { return tail_; }
  ThresholdRange range() const noexcept { return range_; }
  std::size_t interval_length() const noexcept { return m_; }
  bool increasing() const noexcept { return increasing_; }
  const std::vector<double>& thetas() const noexcept { return thetas_; }
  /// Tabulated argmin ranks before and after the monotone repair.
  const std::vector<double>& raw_ranks() const noexcept { return raw_; }
  const std::vector<double>& repaired_ranks() const noexcept { return repaired_; }

  /// Interval start (rank) minimizing the theoretical MSE; ties go to the more
  /// extreme threshold.
  std::size_t argmin_start(double theta) const {
    const auto model = detail::family_model(family_, theta);
    const std::size_t starts = range_.size() - m_ + 1;
    std::vector<double> total(starts);
    if (m_ == 1) {
      for (std::size_t k = 0; k < starts; ++k) total[k] = plugin_mse(family_, theta, n_, range_.lo + k, tail_).total;
    } else {
      const auto parts = detail::interval_mse(model, n_, tail_, range_, m_);
      for (std::size_t k = 0; k < starts; ++k) total[k] = parts[k].first + parts[k].second;
    }
    std::size_t best = tail_ == Tail::lower ? 0 : starts - 1;
    for (std::size_t step = 0; step < starts; ++step) {
      const std::size_t k = tail_ == Tail::lower ? step : starts - 1 - step;
      if (total[k] < total[best]) best = k;
    }
    return range_.lo + best;
  }

  double operator()(double theta) const {
    return static_cast<double>(argmin_start(theta)) / static_cast<double>(n_);
  }

  /// Range of phi over the tabulated grid, as threshold fractions.
  std::pair<double, double> attainable() const {
    const auto [lo, hi] = std::minmax_element(repaired_.begin(), repaired_.end());
    return {*lo / static_cast<double>(n_), *hi / static_cast<double>(n_)};
  }

  /// Generalized inverse: inf{theta : phi(theta) >= u} for increasing phi,
  /// inf{theta : phi(theta) <= u} for decreasing phi. Throws out_of_range_error
  /// outside the attainable range.
  double inverse(double u) const {
    const auto [lo, hi] = attainable();
    const double eps = 1e-12;
    if (!(u >= lo - eps && u <= hi + eps)) throw out_of_range_error("phi_inverse argument outside phi range", lo, hi);
    const double target = u * static_cast<double>(n_);
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(target); it != cache_.end()) return it->second;
    }
    auto reached = [&](double rank) { return increasing_ ? rank >= target - 1e-9 : rank <= target + 1e-9; };
    std::size_t k = 0;
    while (k < grid_size && !reached(repaired_[k])) ++k;
    double result = thetas_[std::min(k, grid_size - 1)];
    if (k > 0 && k < grid_size) {
      double a = thetas_[k - 1];
      double b = thetas_[k];
      while (b - a > 1e-4) {
        const double mid = 0.5 * (a + b);
        if (reached(static_cast<double>(argmin_start(mid))))
          b = mid;
        else
          a = mid;
      }
      result = b;
    }
    std::lock_guard lock(mutex_);
    cache_.emplace(target, result);
    return result;
  }

  /// inverse(u) with u clamped into the attainable range first.
  double inverse_clamped(double u) const {
    const auto [lo, hi] = attainable();
    return inverse(std::clamp(u, lo, hi));
  }

 private:
  static std::vector<double> isotonic(const std::vector<double>& y, bool increasing) {
    // pool-adjacent-violators on the (possibly negated) sequence
    std::vector<double> value;
    std::vector<std::size_t> weight;
    for (double v : y) {
      value.push_back(increasing ? v : -v);
      weight.push_back(1);
      while (value.size() > 1 && value[value.size() - 2] > value.back()) {
        const std::size_t w = weight[weight.size() - 2] + weight.back();
        const double merged =
            (value[value.size() - 2] * weight[weight.size() - 2] + value.back() * weight.back()) / static_cast<double>(w);
        value.pop_back();
        weight.pop_back();
        value.back() = merged;
        weight.back() = w;
      }
    }
    std::vector<double> out;
    for (std::size_t k = 0; k < value.size(); ++k)
      for (std::size_t r = 0; r < weight[k]; ++r) out.push_back(increasing ? value[k] : -value[k]);
    return out;
  }

  Family family_;
  std::size_t n_;
  Tail tail_;
  ThresholdRange range_;
  std::size_t m_;
  std::vector<double> thetas_;
  std::vector<double> raw_;
  std::vector<double> repaired_;
  bool increasing_ = true;
  mutable std::mutex mutex_;
  mutable std::map<double, double> cache_;
};

/// Shared PhiMap for (family, n, tail, range, m); built once per process.
inline std::shared_ptr<const PhiMap> phi_map(Family family, std::size_t n, Tail tail, ThresholdRange range,
                                             std::size_t m = 1) {
  using Key = std::tuple<int, std::size_t, int, std::size_t, std::size_t, std::size_t>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const PhiMap>> registry;
  const Key key{static_cast<int>(family), n, static_cast<int>(tail), range.lo, range.hi, m};
  {
    std::lock_guard lock(mutex);
    if (auto it = registry.find(key); it != registry.end()) return it->second;
  }
  auto built = std::make_shared<const PhiMap>(family, n, tail, range, m);
  std::lock_guard lock(mutex);
  return registry.emplace(key, std::move(built)).first->second;
}

inline double phi(Family family, double theta, std::size_t n, Tail tail, const SelectionConfig& cfg = {}) {
  return (*phi_map(family, n, tail, search_range(n, tail, cfg)))(theta);
}

inline double phi_inverse(Family family, double u, std::size_t n, Tail tail, const SelectionConfig& cfg = {}) {
  return phi_map(family, n, tail, search_range(n, tail, cfg))->inverse(u);
}

// ---- plug-in selectors ------------------------------------------------------

namespace detail {

inline SelectionResult base_result(Method method, Tail tail) {
  SelectionResult r;
  r.method = method;
  r.tail = tail;
  return r;
}

inline void set_single_estimate(SelectionResult& r, const PseudoSample& s, std::size_t i) {
  r.threshold = i;
  r.length = 1;
  r.estimate = lambda_hat(s, i, r.tail);
  r.diagnostics.clamped = r.tail == Tail::upper && lambda_upper_hat_clamped(s, i);
}

inline void set_interval_estimate(SelectionResult& r, const PseudoSample& s, std::size_t k, std::size_t m) {
  r.threshold = k;
  r.length = m;
  r.estimate = std::clamp(lambda_average_hat(s, k, m, r.tail), 0.0, 1.0);
  if (r.tail == Tail::upper)
    for (std::size_t i = k; i < k + m; ++i) r.diagnostics.clamped |= lambda_upper_hat_clamped(s, i);
}

// Index order from the extreme end of a run of `count` candidates.
inline std::size_t extreme_order(Tail tail, std::size_t step, std::size_t count) {
  return tail == Tail::lower ? step : count - 1 - step;
}

// Two-step crossing search over interval starts [lo, hi]: minimize
// (Psi(k) - Phi^{-1}(k/n))^2 by Nelder-Mead on a real relaxation of k from two
// starts, then sweep +-3 ranks around the best start.
template <class PsiFn>
std::optional<std::pair<std::size_t, double>> crossing_search(PsiFn&& psi_at, const PhiMap& map, std::size_t lo,
                                                              std::size_t hi, Diagnostics& diag) {
  const std::size_t n = map.n();
  const auto nd = static_cast<double>(n);
  const auto [phi_lo, phi_hi] = map.attainable();
  std::map<std::size_t, double> seen;
  auto objective_at = [&](std::size_t k) {
    if (auto it = seen.find(k); it != seen.end()) return it->second;
    double value = std::numeric_limits<double>::infinity();
    const auto p = psi_at(k);
    const double u = static_cast<double>(k) / nd;
    const double target = map.inverse_clamped(u);
    if (p) {
      const double gap = *p - target;
      // Outside the attainable phi range the inverse is flat; the distance to
      // the range keeps the relaxation sloped toward it.
      const double outside = u < phi_lo ? phi_lo - u : (u > phi_hi ? u - phi_hi : 0.0);
      value = gap * gap + outside;
      diag.crossing.push_back({k, *p, target});
    }
    seen.emplace(k, value);
    return value;
  };
  auto to_rank = [&](double x) {
    const double r = std::round(x);
    return static_cast<std::size_t>(std::clamp(r, static_cast<double>(lo), static_cast<double>(hi)));
  };
  const bool lower = map.tail() == Tail::lower;
  const double starts[2] = {lower ? 0.02 * nd : 0.90 * nd, lower ? 0.10 * nd : 0.98 * nd};
  NelderMeadOptions opt;
  opt.initial_step = std::max(2.0, 0.02 * nd);
  opt.x_tol = 0.5;
  opt.max_evaluations = 80;
  for (double x0 : starts) {
    const double start = std::clamp(x0, static_cast<double>(lo), static_cast<double>(hi));
    nelder_mead([&](const std::vector<double>& x) { return objective_at(to_rank(x[0])); }, std::vector<double>{start},
                opt);
  }
  auto best_of_seen = [&]() -> std::optional<std::pair<std::size_t, double>> {
    std::optional<std::pair<std::size_t, double>> best;
    // iterate from the extreme end so ties keep the more extreme rank
    auto consider = [&](std::size_t k, double v) {
      if (std::isfinite(v) && (!best || v < best->second)) best = std::pair{k, v};
    };
    if (lower)
      for (const auto& [k, v] : seen) consider(k, v);
    else
      for (auto it = seen.rbegin(); it != seen.rend(); ++it) consider(it->first, it->second);
    return best;
  };
  auto best = best_of_seen();
  if (best) {
    const std::size_t centre = best->first;
    for (std::size_t k = centre > lo + 3 ? centre - 3 : lo; k <= std::min(hi, centre + 3); ++k) objective_at(k);
    best = best_of_seen();
  }
  diag.evaluations += seen.size();
  return best;
}

}  // namespace detail

/// Simple plug-in selector with an injected psi: i* = argmin_i MSE(i, C_psi(i/n)).
template <class PsiFn>
SelectionResult select_simple_plugin_with(PsiFn&& psi_at, const PseudoSample& s, Tail tail, Family family,
                                          const SelectionConfig& cfg = {}) {
  const std::size_t n = s.size();
  const auto range = search_range(n, tail, cfg);
  auto res = detail::base_result(Method::plugin, tail);
  std::optional<std::size_t> best;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::size_t, double>> curve;
  for (std::size_t step = 0; step < range.size(); ++step) {
    const std::size_t i = range.lo + detail::extreme_order(tail, step, range.size());
    const auto theta = psi_at(i);
    if (!theta) {
      ++res.diagnostics.skipped;
      continue;
    }
    const double value = plugin_mse(family, *theta, n, i, tail).total;
    curve.emplace_back(i, value);
    if (value < best_value) {
      best_value = value;
      best = i;
    }
  }
  res.diagnostics.evaluations = range.size();
  if (!best) throw degenerate_likelihood("plug-in selection: psi is degenerate at every candidate threshold");
  std::sort(curve.begin(), curve.end());
  res.diagnostics.mse_curve = std::move(curve);
  detail::set_single_estimate(res, s, *best);
  res.theta_hat = psi_at(*best);
  return res;
}

inline SelectionResult select_simple_plugin(const PseudoSample& s, Tail tail, Family family,
                                            const SelectionConfig& cfg = {}) {
  PsiCache cache(s, tail, family, cfg);
  return select_simple_plugin_with(cache, s, tail, family, cfg);
}

/// Two-step plug-in selector with an injected psi: the rank where psi(i/n)
/// crosses phi^{-1}(i/n). Falls back to the simple plug-in (flagged) when every
/// candidate is degenerate.
template <class PsiFn>
SelectionResult select_two_step_with(PsiFn&& psi_at, const PseudoSample& s, Tail tail, Family family,
                                     const SelectionConfig& cfg = {}) {
  const std::size_t n = s.size();
  const auto range = search_range(n, tail, cfg);
  const auto map = phi_map(family, n, tail, range, 1);
  auto res = detail::base_result(Method::twostep, tail);
  const auto best = detail::crossing_search(psi_at, *map, range.lo, range.hi, res.diagnostics);
  if (!best) {
    auto fb = select_simple_plugin_with(psi_at, s, tail, family, cfg);
    fb.method = Method::twostep;
    fb.diagnostics.fallback = true;
    return fb;
  }
  detail::set_single_estimate(res, s, best->first);
  res.theta_hat = psi_at(best->first);
  return res;
}

inline SelectionResult select_two_step(const PseudoSample& s, Tail tail, Family family,
                                       const SelectionConfig& cfg = {}) {
  PsiCache cache(s, tail, family, cfg);
  return select_two_step_with(cache, s, tail, family, cfg);
}

inline std::size_t average_length(std::size_t n, const SelectionConfig& cfg) {
  return cfg.average_m > 0 ? cfg.average_m : PlateauConfig::for_size(n).m;
}

/// Interval of m ranks with the smallest mean plug-in MSE; the estimate is the
/// average estimator over it.
template <class PsiFn>
SelectionResult select_average_minavg_with(PsiFn&& psi_at, const PseudoSample& s, Tail tail, Family family,
                                           std::size_t m, const SelectionConfig& cfg = {}) {
  const std::size_t n = s.size();
  const auto range = search_range(n, tail, cfg);
  if (m < 1 || m > range.size()) throw domain_error("average interval length does not fit the search range");
  auto res = detail::base_result(Method::avg_minavg, tail);
  std::vector<std::optional<double>> per_rank(range.size());
  for (std::size_t k = 0; k < range.size(); ++k) {
    const auto theta = psi_at(range.lo + k);
    if (theta) {
      per_rank[k] = plugin_mse(family, *theta, n, range.lo + k, tail).total;
      res.diagnostics.mse_curve.emplace_back(range.lo + k, *per_rank[k]);
    } else {
      ++res.diagnostics.skipped;
    }
  }
  const std::size_t starts = range.size() - m + 1;
  std::optional<std::size_t> best;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t step = 0; step < starts; ++step) {
    const std::size_t k = detail::extreme_order(tail, step, starts);
    double sum = 0.0;
    bool ok = true;
    for (std::size_t j = k; j < k + m && ok; ++j) {
      if (per_rank[j])
        sum += *per_rank[j];
      else
        ok = false;
    }
    if (!ok) continue;
    const double mean = sum / static_cast<double>(m);
    if (mean < best_value) {
      best_value = mean;
      best = k;
    }
  }
  res.diagnostics.evaluations = range.size();
  if (!best) throw degenerate_likelihood("average selection: no interval without degenerate psi");
  const std::size_t first = range.lo + *best;
  detail::set_interval_estimate(res, s, first, m);
  double theta_sum = 0.0;
  for (std::size_t i = first; i < first + m; ++i) theta_sum += *psi_at(i);
  res.theta_hat = theta_sum / static_cast<double>(m);
  return res;
}

inline SelectionResult select_average_minavg(const PseudoSample& s, Tail tail, Family family, std::size_t m,
                                             const SelectionConfig& cfg = {}) {
  PsiCache cache(s, tail, family, cfg);
  return select_average_minavg_with(cache, s, tail, family, m, cfg);
}

/// Two-step logic on intervals: Psi(k) = mean psi over [k, k+m-1] crossed with
/// the inverse of Phi, the interval start minimizing the average-estimator MSE.
/// Falls back to select_average_minavg (flagged).
template <class PsiFn>
SelectionResult select_average_joint_with(PsiFn&& psi_at, const PseudoSample& s, Tail tail, Family family,
                                          std::size_t m, const SelectionConfig& cfg = {}) {
  const std::size_t n = s.size();
  const auto range = search_range(n, tail, cfg);
  if (m < 1 || m > range.size()) throw domain_error("average interval length does not fit the search range");
  const auto map = phi_map(family, n, tail, range, m);
  auto res = detail::base_result(Method::avg_joint, tail);
  auto interval_psi = [&](std::size_t k) -> std::optional<double> {
    double sum = 0.0;
    for (std::size_t i = k; i < k + m; ++i) {
      const auto p = psi_at(i);
      if (!p) return std::nullopt;
      sum += *p;
    }
    return sum / static_cast<double>(m);
  };
  const auto best = detail::crossing_search(interval_psi, *map, range.lo, range.hi - (m - 1), res.diagnostics);
  if (!best) {
    auto fb = select_average_minavg_with(psi_at, s, tail, family, m, cfg);
    fb.method = Method::avg_joint;
    fb.diagnostics.fallback = true;
    return fb;
  }
  detail::set_interval_estimate(res, s, best->first, m);
  res.theta_hat = interval_psi(best->first);
  return res;
}

inline SelectionResult select_average_joint(const PseudoSample& s, Tail tail, Family family, std::size_t m,
                                            const SelectionConfig& cfg = {}) {
  PsiCache cache(s, tail, family, cfg);
  return select_average_joint_with(cache, s, tail, family, m, cfg);
}

// ---- dispatch ---------------------------------------------------------------

/// Fixed threshold rank at tail probability p: lower max(1, round(p n)),
/// upper min(n-1, round((1-p) n)).
inline std::size_t fixed_rank(std::size_t n, Tail tail, double p) {
  const auto nd = static_cast<double>(n);
  if (tail == Tail::lower) return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(p * nd)));
  return std::min<std::size_t>(n - 1, static_cast<std::size_t>(std::llround((1.0 - p) * nd)));
}

/// The raw estimator series over ranks 1..n-1, as fed to the plateau method.
inline std::vector<double> lambda_series(const PseudoSample& s, Tail tail) {
  std::vector<double> out(s.size() - 1);
  for (std::size_t i = 1; i < s.size(); ++i) out[i - 1] = lambda_hat(s, i, tail);
  return out;
}

/// Runs one estimation method. `cache`, when given, must belong to the same
/// sample, tail and family and is shared between the plug-in methods.
inline SelectionResult estimate_method(const PseudoSample& s, Tail tail, Method method, const SelectionConfig& cfg = {},
                                       PsiCache* cache = nullptr) {
  const Family family = plugin_family(cfg, tail);
  std::optional<PsiCache> local;
  auto psi_cache = [&]() -> PsiCache& {
    if (cache) return *cache;
    if (!local) local.emplace(s, tail, family, cfg);
    return *local;
  };
  switch (method) {
    case Method::fixed1pct:
    case Method::fixed2pct: {
      auto r = detail::base_result(method, tail);
      detail::set_single_estimate(r, s, fixed_rank(s.size(), tail, method == Method::fixed1pct ? 0.01 : 0.02));
      return r;
    }
    case Method::mle: {
      auto r = detail::base_result(method, tail);
      const double theta = pseudo_mle(s, family);
      r.theta_hat = theta;
      r.estimate = tdc(detail::family_model(family, theta), tail);
      return r;
    }
    case Method::plateau: {
      const auto series = lambda_series(s, tail);
      return plateau_estimate(series, tail, PlateauConfig::for_size(s.size()));
    }
    case Method::plugin: return select_simple_plugin_with(psi_cache(), s, tail, family, cfg);
    case Method::twostep: return select_two_step_with(psi_cache(), s, tail, family, cfg);
    case Method::avg_minavg:
      return select_average_minavg_with(psi_cache(), s, tail, family, average_length(s.size(), cfg), cfg);
    case Method::avg_joint:
      return select_average_joint_with(psi_cache(), s, tail, family, average_length(s.size(), cfg), cfg);
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace tdc

#endif  // TDC_SELECTION_HPP
