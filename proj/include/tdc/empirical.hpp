#ifndef TDC_EMPIRICAL_HPP
#define TDC_EMPIRICAL_HPP

// Rank transform, empirical copula and the finite-threshold TDC estimators.
//
// Thresholds are ranks i in [1, n] (alpha = i/n). Observation indices are
// zero-based positions in the input.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tdc/error.hpp"
#include "tdc/types.hpp"

namespace tdc {

/// n rank-transformed observations (rank_x/n, rank_y/n) with the ECDF
/// convention F(x) = #{X_k <= x}/n: ties share the maximal rank.
///
/// Immutable after construction; diagonal and orthant counts are precomputed so
/// every query below is O(1) or O(n).
class PseudoSample {
 public:
  static PseudoSample from_raw(std::span<const Point> raw) {
    if (raw.size() < 2) throw domain_error("pseudo sample needs at least 2 observations");
    std::vector<double> xs(raw.size());
    std::vector<double> ys(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) {
      if (!std::isfinite(raw[j].x) || !std::isfinite(raw[j].y))
        throw domain_error("non-finite observation at index " + std::to_string(j));
      xs[j] = raw[j].x;
      ys[j] = raw[j].y;
    }
    return PseudoSample(max_ranks(xs), max_ranks(ys));
  }

  /// Build from integer ranks in [1, n] (ties must already use the max-rank
  /// convention).
  static PseudoSample from_ranks(std::vector<std::uint32_t> rank_x, std::vector<std::uint32_t> rank_y) {
    if (rank_x.size() != rank_y.size()) throw domain_error("rank vectors differ in length");
    if (rank_x.size() < 2) throw domain_error("pseudo sample needs at least 2 observations");
    const auto n = static_cast<std::uint32_t>(rank_x.size());
    for (std::size_t j = 0; j < rank_x.size(); ++j) {
      if (rank_x[j] < 1 || rank_x[j] > n || rank_y[j] < 1 || rank_y[j] > n)
        throw domain_error("rank out of [1, n]");
    }
    return PseudoSample(std::move(rank_x), std::move(rank_y));
  }

  std::size_t size() const noexcept { return rank_x_.size(); }

  std::uint32_t rank_x(std::size_t j) const { return rank_x_.at(j); }
  std::uint32_t rank_y(std::size_t j) const { return rank_y_.at(j); }

  double u(std::size_t j) const { return static_cast<double>(rank_x_.at(j)) / static_cast<double>(size()); }
  double v(std::size_t j) const { return static_cast<double>(rank_y_.at(j)) / static_cast<double>(size()); }

  /// n * C_n(i/n, i/n) = #{j : rank_x <= i and rank_y <= i}, for i in [0, n].
  std::size_t diagonal_count(std::size_t i) const { return diagonal_.at(i); }

  /// n * F_n(X_j, Y_j) = #{k : rank_x_k <= rank_x_j and rank_y_k <= rank_y_j}.
  std::size_t orthant_count(std::size_t j) const { return orthant_.at(j); }

  std::span<const std::uint32_t> ranks_x() const noexcept { return rank_x_; }
  std::span<const std::uint32_t> ranks_y() const noexcept { return rank_y_; }

 private:
  PseudoSample(std::vector<std::uint32_t> rx, std::vector<std::uint32_t> ry)
      : rank_x_(std::move(rx)), rank_y_(std::move(ry)) {
    const std::size_t n = rank_x_.size();
    diagonal_.assign(n + 1, 0);
    for (std::size_t j = 0; j < n; ++j) ++diagonal_[std::max(rank_x_[j], rank_y_[j])];
    std::partial_sum(diagonal_.begin(), diagonal_.end(), diagonal_.begin());

    // Orthant counts: sweep by rank_x, Fenwick tree over rank_y. Points sharing
    // a rank_x dominate each other in x, so a whole tie group is inserted
    // before it is queried.
    orthant_.assign(n, 0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return rank_x_[a] < rank_x_[b]; });
    std::vector<std::size_t> tree(n + 1, 0);
    auto add = [&](std::size_t pos) {
      for (; pos <= n; pos += pos & (~pos + 1)) ++tree[pos];
    };
    auto prefix = [&](std::size_t pos) {
      std::size_t s = 0;
      for (; pos > 0; pos -= pos & (~pos + 1)) s += tree[pos];
      return s;
    };
    for (std::size_t start = 0; start < n;) {
      std::size_t stop = start;
      while (stop < n && rank_x_[order[stop]] == rank_x_[order[start]]) ++stop;
      for (std::size_t k = start; k < stop; ++k) add(rank_y_[order[k]]);
      for (std::size_t k = start; k < stop; ++k) orthant_[order[k]] = prefix(rank_y_[order[k]]);
      start = stop;
    }
  }

  static std::vector<std::uint32_t> max_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::uint32_t> ranks(n);
    for (std::size_t start = 0; start < n;) {
      std::size_t stop = start;
      while (stop < n && values[order[stop]] == values[order[start]]) ++stop;
      for (std::size_t k = start; k < stop; ++k) ranks[order[k]] = static_cast<std::uint32_t>(stop);
      start = stop;
    }
    return ranks;
  }

  std::vector<std::uint32_t> rank_x_;
  std::vector<std::uint32_t> rank_y_;
  std::vector<std::size_t> diagonal_;
  std::vector<std::size_t> orthant_;
};

inline PseudoSample pseudo_sample(std::span<const Point> raw) { return PseudoSample::from_raw(raw); }

namespace detail {

inline void check_rank(const PseudoSample& s, std::size_t i, Tail tail) {
  const std::size_t hi = tail == Tail::lower ? s.size() : s.size() - 1;
  if (i < 1 || i > hi)
    throw domain_error("threshold rank " + std::to_string(i) + " outside [1, " + std::to_string(hi) +
                       "] for the " + std::string(to_string(tail)) + " tail");
}

}  // namespace detail

/// Empirical copula C_n(u,v) = (1/n) #{j : u_j <= u, v_j <= v}.
inline double empirical_copula(const PseudoSample& s, double u, double v) {
  if (!(u >= 0.0 && u <= 1.0) || !(v >= 0.0 && v <= 1.0))
    throw domain_error("empirical_copula arguments must lie in [0,1]");
  std::size_t count = 0;
  for (std::size_t j = 0; j < s.size(); ++j) count += (s.u(j) <= u && s.v(j) <= v) ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(s.size());
}

/// C_n(i/n, i/n), read from the precomputed diagonal.
inline double empirical_diagonal(const PseudoSample& s, std::size_t i) {
  if (i > s.size()) throw domain_error("diagonal rank exceeds sample size");
  return static_cast<double>(s.diagonal_count(i)) / static_cast<double>(s.size());
}

/// Lower-tail estimator C_n(i/n, i/n) / (i/n).
inline double lambda_lower_hat(const PseudoSample& s, std::size_t i) {
  detail::check_rank(s, i, Tail::lower);
  return static_cast<double>(s.diagonal_count(i)) / static_cast<double>(i);
}

/// Upper-tail estimator (1 - 2i/n + C_n(i/n, i/n)) / (1 - i/n) before clamping.
inline double lambda_upper_hat_raw(const PseudoSample& s, std::size_t i) {
  detail::check_rank(s, i, Tail::upper);
  const auto n = static_cast<double>(s.size());
  const auto k = static_cast<double>(i);
  return (n - 2.0 * k + static_cast<double>(s.diagonal_count(i))) / (n - k);
}

/// Whether the raw upper estimator at rank i falls outside [0,1].
inline bool lambda_upper_hat_clamped(const PseudoSample& s, std::size_t i) {
  const double raw = lambda_upper_hat_raw(s, i);
  return raw < 0.0 || raw > 1.0;
}

/// Upper-tail estimator clamped to [0,1].
inline double lambda_upper_hat(const PseudoSample& s, std::size_t i) {
  return std::clamp(lambda_upper_hat_raw(s, i), 0.0, 1.0);
}

inline double lambda_hat(const PseudoSample& s, std::size_t i, Tail tail) {
  return tail == Tail::lower ? lambda_lower_hat(s, i) : lambda_upper_hat(s, i);
}

/// Mean of the single-threshold estimators over `ranks`.
inline double lambda_average_hat(const PseudoSample& s, std::span<const std::size_t> ranks, Tail tail) {
  if (ranks.empty()) throw domain_error("lambda_average_hat needs at least one rank");
  double sum = 0.0;
  for (std::size_t i : ranks) sum += lambda_hat(s, i, tail);
  return sum / static_cast<double>(ranks.size());
}

/// Average over the consecutive ranks [first, first + m - 1].
inline double lambda_average_hat(const PseudoSample& s, std::size_t first, std::size_t m, Tail tail) {
  std::vector<std::size_t> ranks(m);
  std::iota(ranks.begin(), ranks.end(), first);
  return lambda_average_hat(s, ranks, tail);
}

/// F_n(X_j, Y_j): empirical probability of the lower-left orthant at
/// observation j (zero-based), self included.
inline double joint_orthant_prob(const PseudoSample& s, std::size_t j) {
  if (j >= s.size()) throw domain_error("observation index out of range");
  return static_cast<double>(s.orthant_count(j)) / static_cast<double>(s.size());
}

/// Indices of the extreme observations at rank i:
///   lower: F_n(X_j,Y_j) <= C_n(i/n,i/n);  upper: F_n(X_j,Y_j) >= C_n(i/n,i/n).
/// Boundary observations (equality) belong to both tails.
inline std::vector<std::size_t> extreme_set(const PseudoSample& s, std::size_t i, Tail tail) {
  if (i < 1 || i > s.size()) throw domain_error("threshold rank outside [1, n]");
  const std::size_t cut = s.diagonal_count(i);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const std::size_t f = s.orthant_count(j);
    if (tail == Tail::lower ? f <= cut : f >= cut) out.push_back(j);
  }
  return out;
}

/// Pearson correlation of two equally long columns.
inline double pearson(std::span<const Point> raw) {
  const auto n = static_cast<double>(raw.size());
  if (raw.size() < 2) throw domain_error("pearson needs at least 2 observations");
  double mx = 0.0, my = 0.0;
  for (const auto& p : raw) mx += p.x, my += p.y;
  mx /= n, my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : raw) {
    sxx += (p.x - mx) * (p.x - mx);
    syy += (p.y - my) * (p.y - my);
    sxy += (p.x - mx) * (p.y - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace tdc

#endif  // TDC_EMPIRICAL_HPP
