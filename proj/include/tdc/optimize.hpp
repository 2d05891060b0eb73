#ifndef TDC_OPTIMIZE_HPP
#define TDC_OPTIMIZE_HPP

// Derivative-free minimizers: golden-section search on an interval and the
// Nelder-Mead simplex method.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace tdc {

struct ScalarMinimum {
  double x = 0.0;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
};

/// Golden-section search for a minimum of f on [a, b]. Stops once the bracket
/// is narrower than `tol` or after `max_iter` reductions.
template <class F>
ScalarMinimum golden_section(F&& f, double a, double b, double tol, std::size_t max_iter = 200) {
  constexpr double inv_phi = 0.6180339887498949;
  if (a > b) std::swap(a, b);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  std::size_t evals = 2;
  for (std::size_t it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  return fc <= fd ? ScalarMinimum{c, fc, evals} : ScalarMinimum{d, fd, evals};
}

struct NelderMeadOptions {
  double initial_step = 1.0;
  double x_tol = 1e-6;
  double f_tol = 0.0;
  std::size_t max_evaluations = 500;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead simplex minimization with the standard coefficients (reflection
/// 1, expansion 2, contraction 1/2, shrink 1/2). f takes a const
/// std::vector<double>& and may return +inf for infeasible points.
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> start, const NelderMeadOptions& opt = {}) {
  const std::size_t dim = start.size();
  std::vector<std::vector<double>> simplex(dim + 1, start);
  for (std::size_t k = 0; k < dim; ++k) simplex[k + 1][k] += opt.initial_step;
  std::vector<double> values(dim + 1);
  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };
  for (std::size_t k = 0; k <= dim; ++k) values[k] = eval(simplex[k]);

  std::vector<std::size_t> order(dim + 1);
  bool converged = false;
  while (evals < opt.max_evaluations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[dim - (dim > 0 ? 1 : 0)];

    double spread = 0.0;
    for (std::size_t k = 0; k <= dim; ++k)
      for (std::size_t j = 0; j < dim; ++j) spread = std::max(spread, std::abs(simplex[k][j] - simplex[best][j]));
    const bool flat = std::isfinite(values[worst]) && std::abs(values[worst] - values[best]) <= opt.f_tol;
    if (spread <= opt.x_tol || (opt.f_tol > 0.0 && flat)) {
      converged = true;
      break;
    }

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t k = 0; k <= dim; ++k) {
      if (k == worst) continue;
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[k][j] / static_cast<double>(dim);
    }
    auto along = [&](double coef) {
      std::vector<double> x(dim);
      for (std::size_t j = 0; j < dim; ++j) x[j] = centroid[j] + coef * (simplex[worst][j] - centroid[j]);
      return x;
    };

    const auto reflected = along(-1.0);
    const double fr = eval(reflected);
    if (fr < values[best]) {
      const auto expanded = along(-2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const auto contracted = along(outside ? -0.5 : 0.5);
    const double fc = eval(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k <= dim; ++k) {
      if (k == best) continue;
      for (std::size_t j = 0; j < dim; ++j) simplex[k][j] = simplex[best][j] + 0.5 * (simplex[k][j] - simplex[best][j]);
      values[k] = eval(simplex[k]);
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  const auto idx = static_cast<std::size_t>(it - values.begin());
  return {simplex[idx], values[idx], evals, converged};
}

}  // namespace tdc

#endif  // TDC_OPTIMIZE_HPP
