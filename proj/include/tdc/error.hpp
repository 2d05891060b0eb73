#ifndef TDC_ERROR_HPP
#define TDC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tdc {

/// Argument outside the mathematical domain of an operation (probability
/// outside [0,1], copula parameter outside its family range, ...).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The operation has no closed form for the requested copula family.
class unsupported_family : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A likelihood that cannot identify the parameter (empty or tiny extreme set,
/// vanishing density at an extreme observation).
class degenerate_likelihood : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the range attained by a tabulated monotone map.
class out_of_range_error : public std::out_of_range {
 public:
  out_of_range_error(const std::string& what, double lo, double hi)
      : std::out_of_range(what + " (attainable range [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "])"),
        lo_(lo),
        hi_(hi) {}

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// Malformed input data (CSV rows, JSON tables).
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tdc

#endif  // TDC_ERROR_HPP
