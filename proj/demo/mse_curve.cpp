// Theoretical MSE of the lower-tail estimator for a Clayton copula as a
// function of the threshold, with the optimal threshold phi(theta).
//
//   demo_mse_curve [theta] [n]

#include <cstdio>
#include <cstdlib>

#include "tdc/mse.hpp"
#include "tdc/selection.hpp"

int main(int argc, char** argv) {
  const double theta = argc > 1 ? std::atof(argv[1]) : 1.0;
  const std::size_t n = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 1000;
  std::printf("# clayton theta=%g n=%zu, lambda_L=%.4f\n", theta, n, tdc::tdc_lower(tdc::CopulaModel::clayton(theta)));
  std::printf("alpha\tvariance\tbias_sq\tmse\n");
  for (std::size_t i = 5; i <= n / 2; i += n / 100) {
    const auto r = tdc::mse_lower_clayton(theta, n, double(i) / double(n));
    std::printf("%.3f\t%.3e\t%.3e\t%.3e\n", r.alpha, r.variance, r.bias_sq, r.total);
  }
  std::printf("# optimal threshold phi(theta) = %.4f\n", tdc::phi(tdc::Family::clayton, theta, n, tdc::Tail::lower));
}
