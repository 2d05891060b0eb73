#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "tdc/copula.hpp"
#include "tdc/empirical.hpp"

using namespace tdc;

namespace {

PseudoSample comonotone(std::size_t n) {
  std::vector<Point> raw;
  for (std::size_t j = 0; j < n; ++j) raw.push_back({double(j), double(10 * j)});
  return pseudo_sample(raw);
}

PseudoSample antitone4() { return pseudo_sample(std::vector<Point>{{1, 4}, {2, 3}, {3, 2}, {4, 1}}); }

PseudoSample from_y_ranks(const std::vector<std::uint32_t>& ry) {
  std::vector<std::uint32_t> rx(ry.size());
  std::iota(rx.begin(), rx.end(), 1u);
  return PseudoSample::from_ranks(rx, ry);
}

}  // namespace

TEST(PseudoSample, ComonotoneAndAntitoneRanks) {
  const auto co = pseudo_sample(std::vector<Point>{{1, 10}, {2, 20}, {3, 30}});
  ASSERT_EQ(co.size(), 3u);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_DOUBLE_EQ(co.u(j), (j + 1) / 3.0);
    EXPECT_DOUBLE_EQ(co.v(j), (j + 1) / 3.0);
  }
  const auto anti = pseudo_sample(std::vector<Point>{{1, 30}, {2, 20}, {3, 10}});
  EXPECT_DOUBLE_EQ(anti.u(0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(anti.v(0), 1.0);
  EXPECT_DOUBLE_EQ(anti.v(1), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(anti.u(2), 1.0);
  EXPECT_DOUBLE_EQ(anti.v(2), 1.0 / 3.0);
}

TEST(PseudoSample, TiesTakeMaximalRank) {
  const auto s = pseudo_sample(std::vector<Point>{{1, 5}, {1, 7}});
  EXPECT_DOUBLE_EQ(s.u(0), 1.0);
  EXPECT_DOUBLE_EQ(s.u(1), 1.0);
  EXPECT_DOUBLE_EQ(s.v(0), 0.5);
  EXPECT_DOUBLE_EQ(s.v(1), 1.0);
}

TEST(PseudoSample, RejectsBadInput) {
  EXPECT_THROW(pseudo_sample(std::vector<Point>{{1, 2}}), domain_error);
  EXPECT_THROW(pseudo_sample(std::vector<Point>{{1, 2}, {NAN, 3}}), domain_error);
  EXPECT_THROW(pseudo_sample(std::vector<Point>{{1, 2}, {3, INFINITY}}), domain_error);
  EXPECT_THROW(PseudoSample::from_ranks({1, 2}, {1, 3}), domain_error);
  EXPECT_THROW(PseudoSample::from_ranks({1, 2}, {1}), domain_error);
}

TEST(EmpiricalCopula, Examples) {
  EXPECT_DOUBLE_EQ(empirical_copula(comonotone(4), 0.5, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(empirical_copula(antitone4(), 0.5, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(empirical_copula(antitone4(), 1.0, 1.0), 1.0);
  EXPECT_THROW(empirical_copula(antitone4(), 1.5, 0.5), domain_error);
}

TEST(EmpiricalCopula, DiagonalCountsMatchDirectCounting) {
  auto rng = RandomStream(5);
  auto raw = sample(CopulaModel::clayton(1.3), 300, rng);
  for (std::size_t j = 0; j < raw.size(); j += 7) raw[j].x = std::round(raw[j].x * 20.0);  // force ties
  const auto s = pseudo_sample(raw);
  for (std::size_t i = 0; i <= s.size(); ++i) {
    const double a = static_cast<double>(i) / s.size();
    EXPECT_DOUBLE_EQ(empirical_diagonal(s, i), empirical_copula(s, a, a)) << i;
  }
}

TEST(EmpiricalCopula, TwoIncreasingOnAtoms) {
  auto rng = RandomStream(6);
  const auto s = pseudo_sample(sample(CopulaModel::gumbel(1.6), 60, rng));
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double u1 = double(i) / n, u2 = double(i + 1) / n, v1 = double(j) / n, v2 = double(j + 1) / n;
      EXPECT_GE(empirical_copula(s, u2, v2) - empirical_copula(s, u2, v1) - empirical_copula(s, u1, v2) +
                    empirical_copula(s, u1, v1),
                -1e-15);
    }
}

TEST(LambdaLower, Examples) {
  const auto co = comonotone(10);
  for (std::size_t i = 1; i <= 10; ++i) EXPECT_DOUBLE_EQ(lambda_lower_hat(co, i), 1.0);
  EXPECT_DOUBLE_EQ(lambda_lower_hat(antitone4(), 2), 0.0);
  auto rng = RandomStream(7);
  const auto s = pseudo_sample(sample(CopulaModel::gaussian(0.3), 200, rng));
  EXPECT_DOUBLE_EQ(lambda_lower_hat(s, 200), 1.0);
  EXPECT_THROW(lambda_lower_hat(s, 0), domain_error);
  EXPECT_THROW(lambda_lower_hat(s, 201), domain_error);
}

TEST(LambdaUpper, Examples) {
  const auto co = comonotone(10);
  for (std::size_t i = 1; i < 10; ++i) EXPECT_DOUBLE_EQ(lambda_upper_hat(co, i), 1.0);
  EXPECT_DOUBLE_EQ(lambda_upper_hat(antitone4(), 2), 0.0);
  EXPECT_THROW(lambda_upper_hat(co, 10), domain_error);

  // 100 points with exactly 81 having both ranks <= 90, so C_n(0.9,0.9) = 0.81.
  std::vector<std::uint32_t> ry(100);
  for (int k = 0; k < 9; ++k) ry[k] = 91 + k;
  for (int k = 9; k < 90; ++k) ry[k] = k - 8;
  ry[90] = 100;
  for (int k = 91; k < 100; ++k) ry[k] = k - 9;
  const auto s = from_y_ranks(ry);
  EXPECT_DOUBLE_EQ(empirical_diagonal(s, 90), 0.81);
  EXPECT_NEAR(lambda_upper_hat(s, 90), 0.1, 1e-15);
}

TEST(LambdaUpper, ClampingIsReported) {
  // Without ties C_n(a,a) >= 2a - 1 keeps the raw value in [0,1]; a tied margin
  // breaks that bound.
  const auto tied = pseudo_sample(std::vector<Point>{{1, 1}, {1, 2}, {1, 3}, {1, 4}});
  EXPECT_DOUBLE_EQ(lambda_upper_hat_raw(tied, 3), -2.0);
  EXPECT_TRUE(lambda_upper_hat_clamped(tied, 3));
  EXPECT_DOUBLE_EQ(lambda_upper_hat(tied, 3), 0.0);

  auto rng = RandomStream(8);
  const auto s = pseudo_sample(sample(CopulaModel::clayton(2.0), 500, rng));
  for (std::size_t i = 1; i < 500; ++i) {
    EXPECT_FALSE(lambda_upper_hat_clamped(s, i));
    EXPECT_GE(lambda_upper_hat(s, i), 0.0);
    EXPECT_LE(lambda_upper_hat(s, i), 1.0);
  }
}

TEST(LambdaAverage, Examples) {
  auto rng = RandomStream(9);
  const auto s = pseudo_sample(sample(CopulaModel::gumbel(2.0), 300, rng));
  const std::vector<std::size_t> one{17};
  EXPECT_DOUBLE_EQ(lambda_average_hat(s, one, Tail::lower), lambda_lower_hat(s, 17));
  const std::vector<std::size_t> upper_one{270};
  EXPECT_DOUBLE_EQ(lambda_average_hat(s, upper_one, Tail::upper), lambda_upper_hat(s, 270));
  const std::vector<std::size_t> many{2, 5, 9};
  EXPECT_DOUBLE_EQ(lambda_average_hat(comonotone(12), many, Tail::lower), 1.0);
  EXPECT_DOUBLE_EQ(lambda_average_hat(comonotone(12), many, Tail::upper), 1.0);

  // n = 20 with lambda_L(5/20) = 1/5 and lambda_L(10/20) = 4/10.
  const auto t = from_y_ranks({1, 11, 12, 13, 14, 7, 6, 8, 15, 16, 2, 3, 4, 5, 9, 10, 17, 18, 19, 20});
  EXPECT_DOUBLE_EQ(lambda_lower_hat(t, 5), 0.2);
  EXPECT_DOUBLE_EQ(lambda_lower_hat(t, 10), 0.4);
  const std::vector<std::size_t> pair{5, 10};
  EXPECT_NEAR(lambda_average_hat(t, pair, Tail::lower), 0.3, 1e-15);
  EXPECT_NEAR(lambda_average_hat(t, 5, 1, Tail::lower), 0.2, 1e-15);
  EXPECT_THROW(lambda_average_hat(t, std::vector<std::size_t>{}, Tail::lower), domain_error);
  EXPECT_THROW(lambda_average_hat(t, std::vector<std::size_t>{20}, Tail::upper), domain_error);
}

TEST(JointOrthant, Examples) {
  const auto co = comonotone(3);
  EXPECT_DOUBLE_EQ(joint_orthant_prob(co, 0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(joint_orthant_prob(co, 1), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(joint_orthant_prob(co, 2), 1.0);
  const auto anti = antitone4();
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(joint_orthant_prob(anti, j), 0.25);
  EXPECT_THROW(joint_orthant_prob(anti, 4), domain_error);
}

TEST(JointOrthant, FenwickSweepMatchesQuadraticCount) {
  auto rng = RandomStream(10);
  auto raw = sample(CopulaModel::student_t(0.4, 3.0), 400, rng);
  for (std::size_t j = 0; j < raw.size(); j += 5) raw[j].y = std::round(raw[j].y * 10.0);
  for (std::size_t j = 0; j < raw.size(); j += 3) raw[j].x = std::round(raw[j].x * 10.0);
  const auto s = pseudo_sample(raw);
  for (std::size_t j = 0; j < s.size(); ++j) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < s.size(); ++k) count += (s.u(k) <= s.u(j) && s.v(k) <= s.v(j)) ? 1 : 0;
    EXPECT_EQ(s.orthant_count(j), count);
  }
}

TEST(ExtremeSet, Examples) {
  const auto co = comonotone(3);
  EXPECT_EQ(extreme_set(co, 1, Tail::lower), (std::vector<std::size_t>{0}));
  EXPECT_EQ(extreme_set(co, 3, Tail::lower), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(extreme_set(antitone4(), 2, Tail::lower).empty());
  EXPECT_EQ(extreme_set(antitone4(), 2, Tail::upper).size(), 4u);
}

TEST(ExtremeSet, LowerAndUpperCoverEverything) {
  auto rng = RandomStream(11);
  const auto s = pseudo_sample(sample(CopulaModel::gumbel(1.4), 500, rng));
  for (std::size_t i : {10u, 100u, 250u, 450u}) {
    const auto lo = extreme_set(s, i, Tail::lower);
    const auto hi = extreme_set(s, i, Tail::upper);
    std::vector<int> seen(s.size(), 0);
    for (auto j : lo) seen[j] = 1;
    for (auto j : hi) seen[j] = 1;
    EXPECT_EQ(std::accumulate(seen.begin(), seen.end(), 0), 500);
  }
}

TEST(Estimators, RankInvariance) {
  auto rng = RandomStream(12);
  const auto raw = sample(CopulaModel::clayton(1.5), 400, rng);
  std::vector<Point> transformed;
  for (const auto& p : raw) transformed.push_back({std::log(p.x) * 3.0 - 1.0, std::pow(p.y, 3.0) + 7.0});
  const auto a = pseudo_sample(raw);
  const auto b = pseudo_sample(transformed);
  for (std::size_t i = 1; i < 400; i += 13) {
    EXPECT_EQ(lambda_lower_hat(a, i), lambda_lower_hat(b, i));
    EXPECT_EQ(lambda_upper_hat(a, i), lambda_upper_hat(b, i));
    EXPECT_EQ(extreme_set(a, i, Tail::lower), extreme_set(b, i, Tail::lower));
  }
}

TEST(Estimators, LowerEstimatorConvergesToDiagonalRatio) {
  const auto m = CopulaModel::clayton(1.0);
  const std::size_t n = 5000, reps = 2000, i = 250;
  double sum = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    auto rng = RandomStream::substream(2024, r);
    sum += lambda_lower_hat(pseudo_sample(sample(m, n, rng)), i);
  }
  const double target = diagonal(m, 0.05) / 0.05;
  EXPECT_NEAR(target, 0.5128, 1e-4);
  EXPECT_NEAR(sum / reps, target, 0.02);
}
