#ifndef TDC_TYPES_HPP
#define TDC_TYPES_HPP

#include <string_view>

namespace tdc {

/// One bivariate observation, either on the raw scale or on the unit square.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

enum class Tail { lower, upper };

constexpr std::string_view to_string(Tail t) noexcept { return t == Tail::lower ? "lower" : "upper"; }

}  // namespace tdc

#endif  // TDC_TYPES_HPP
