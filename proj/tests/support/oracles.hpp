#ifndef TDC_TESTS_ORACLES_HPP
#define TDC_TESTS_ORACLES_HPP

// Independent reference computations used only by the tests. Nothing here calls
// into the code under test except to read model parameters.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tdc/types.hpp"

namespace oracle {

/// Kendall's tau-a by Knight's O(n log n) merge-sort algorithm (no ties).
inline double kendall_tau(const std::vector<tdc::Point>& pts) {
  const std::size_t n = pts.size();
  std::vector<tdc::Point> s = pts;
  std::sort(s.begin(), s.end(), [](const tdc::Point& a, const tdc::Point& b) { return a.x < b.x; });
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = s[k].y;
  std::vector<double> buf(n);
  long double swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (y[i] <= y[j]) {
          buf[k++] = y[i++];
        } else {
          swaps += static_cast<long double>(mid - i);
          buf[k++] = y[j++];
        }
      }
      while (i < mid) buf[k++] = y[i++];
      while (j < hi) buf[k++] = y[j++];
    }
    std::swap(y, buf);
  }
  const long double pairs = static_cast<long double>(n) * (n - 1) / 2.0L;
  return static_cast<double>((pairs - 2.0L * swaps) / pairs);
}

/// Plain O(n^2) Kendall tau, used to validate the fast version.
inline double kendall_tau_naive(const std::vector<tdc::Point>& pts) {
  long long conc = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double s = (pts[i].x - pts[j].x) * (pts[i].y - pts[j].y);
      conc += s > 0 ? 1 : (s < 0 ? -1 : 0);
    }
  const double pairs = static_cast<double>(pts.size()) * (pts.size() - 1) / 2.0;
  return static_cast<double>(conc) / pairs;
}

/// Two-dimensional integral of f over [a1,b1] x [a2,b2] by nested Gauss-Kronrod.
template <class F>
double integrate2(F&& f, double a1, double b1, double a2, double b2) {
  using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
  return gk::integrate(
      [&](double x) { return gk::integrate([&](double y) { return f(x, y); }, a2, b2, 10, 1e-12); }, a1, b1, 10,
      1e-12);
}

/// Sample mean and unbiased variance.
inline std::pair<double, double> mean_var(const std::vector<double>& xs) {
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return {m, s / static_cast<double>(xs.size() - 1)};
}

/// Unbiased covariance.
inline double covariance(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - ma) * (b[k] - mb);
  return s / static_cast<double>(a.size() - 1);
}

/// Clayton diagonal written from the copula definition, independent of the
/// library's closed forms.
inline double clayton_cdf(double t, double u, double v) {
  return std::pow(std::pow(u, -t) + std::pow(v, -t) - 1.0, -1.0 / t);
}

inline double gumbel_cdf(double t, double u, double v) {
  return std::exp(-std::pow(std::pow(-std::log(u), t) + std::pow(-std::log(v), t), 1.0 / t));
}

}  // namespace oracle

#endif  // TDC_TESTS_ORACLES_HPP
