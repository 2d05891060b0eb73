#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "tdc/optimize.hpp"

using namespace tdc;

TEST(GoldenSection, Quadratic) {
  const auto r = golden_section([](double x) { return (x - 1.234) * (x - 1.234) + 3.0; }, -5.0, 5.0, 1e-9);
  EXPECT_NEAR(r.x, 1.234, 1e-7);  // sqrt(eps) floor of a quadratic
  EXPECT_NEAR(r.value, 3.0, 1e-15);
  EXPECT_GT(r.evaluations, 2u);
}

TEST(GoldenSection, ReversedBracketAndBoundaryMinimum) {
  const auto r = golden_section([](double x) { return x; }, 2.0, -1.0, 1e-8);
  EXPECT_NEAR(r.x, -1.0, 1e-7);
}

TEST(GoldenSection, NonSmoothUnimodal) {
  const auto r = golden_section([](double x) { return std::abs(x - 0.3) + std::exp(-1.0); }, 0.0, 1.0, 1e-10);
  EXPECT_NEAR(r.x, 0.3, 1e-9);
}

TEST(GoldenSection, InfiniteOutsideFeasibleRegion) {
  auto f = [](double x) { return x < 0.5 ? INFINITY : (x - 0.7) * (x - 0.7); };
  const auto r = golden_section(f, 0.0, 1.0, 1e-9);
  EXPECT_NEAR(r.x, 0.7, 1e-8);
}

TEST(NelderMead, Rosenbrock) {
  auto f = [](const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  NelderMeadOptions opt;
  opt.initial_step = 0.5;
  opt.x_tol = 1e-10;
  opt.max_evaluations = 5000;
  const auto r = nelder_mead(f, {-1.2, 1.0}, opt);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], 1.0, 1e-6);
  EXPECT_LT(r.value, 1e-12);
}

TEST(NelderMead, OneDimensionalFromFarStart) {
  const auto r = nelder_mead([](const std::vector<double>& x) { return (x[0] - 40.0) * (x[0] - 40.0); }, {0.0}, {});
  EXPECT_NEAR(r.x[0], 40.0, 1e-5);
}

TEST(NelderMead, EvaluationBudget) {
  NelderMeadOptions opt;
  opt.max_evaluations = 25;
  const auto r = nelder_mead([](const std::vector<double>& x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; },
                             {3.0, -2.0, 1.0}, opt);
  EXPECT_LE(r.evaluations, 25u + 3u);
  EXPECT_FALSE(r.converged);
}

TEST(NelderMead, InfeasibleRegionsRejected) {
  auto f = [](const std::vector<double>& x) { return x[0] < 0 ? INFINITY : (x[0] - 2) * (x[0] - 2) + x[1] * x[1]; };
  NelderMeadOptions opt;
  opt.x_tol = 1e-9;
  const auto r = nelder_mead(f, {0.5, 0.5}, opt);
  EXPECT_NEAR(r.x[0], 2.0, 1e-6);
  EXPECT_NEAR(r.x[1], 0.0, 1e-6);
}
