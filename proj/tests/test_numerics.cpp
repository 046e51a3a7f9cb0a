#include "rmc/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

TEST(Extrapolation, LinearSequence) {
  // u(eps) = 3 + 2 eps extrapolates exactly with two points, but two
  // samples cannot certify convergence; three can.
  std::vector<double> eps2 = {1e-2, 5e-3};
  std::vector<double> vals2 = {3.0 + 2e-2, 3.0 + 1e-2};
  EXPECT_NEAR(rmc::extrapolate_to_zero(eps2, vals2).value, 3.0, 1e-12);

  std::vector<double> eps3 = {1e-2, 5e-3, 2.5e-3};
  std::vector<double> vals3 = {3.0 + 2e-2, 3.0 + 1e-2, 3.0 + 5e-3};
  auto r = rmc::extrapolate_to_zero(eps3, vals3);
  EXPECT_NEAR(r.value, 3.0, 1e-12);
  EXPECT_TRUE(r.converged);
}

TEST(Extrapolation, PolynomialSequence) {
  std::vector<double> eps = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
  std::vector<double> vals;
  for (double e : eps) vals.push_back(1.5 - 0.7 * e + 4.0 * e * e - e * e * e);
  auto r = rmc::extrapolate_to_zero(eps, vals);
  EXPECT_NEAR(r.value, 1.5, 1e-12);
}

TEST(Extrapolation, FlagsDivergentSequence) {
  // An eps-pole (a point mass probed by the density formula) must be
  // flagged, not silently extrapolated.
  std::vector<double> eps = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
  std::vector<double> vals;
  for (double e : eps) vals.push_back(1.0 / e);
  auto r = rmc::extrapolate_to_zero(eps, vals);
  EXPECT_FALSE(r.converged);
}

TEST(Extrapolation, RejectsBadSchedules) {
  std::vector<double> one = {1e-2};
  std::vector<double> v1 = {1.0};
  EXPECT_THROW(rmc::extrapolate_to_zero(one, v1), std::invalid_argument);
  std::vector<double> up = {1e-3, 1e-2};
  std::vector<double> v2 = {1.0, 2.0};
  EXPECT_THROW(rmc::extrapolate_to_zero(up, v2), std::invalid_argument);
}

TEST(Quadrature, SmoothIntegrals) {
  auto sq = [](double x) { return x * x; };
  EXPECT_NEAR(rmc::integrate_adaptive(sq, 0.0, 1.0), 1.0 / 3.0, 1e-12);
  auto osc = [](double x) { return std::sin(x); };
  EXPECT_NEAR(rmc::integrate_adaptive(osc, 0.0, std::numbers::pi), 2.0, 1e-10);
}

TEST(Quadrature, SqrtEndpoint) {
  auto f = [](double x) { return std::sqrt(x); };
  EXPECT_NEAR(rmc::integrate_adaptive(f, 0.0, 1.0, 1e-11), 2.0 / 3.0, 1e-8);
}

TEST(Trapezoid, CumulativeMatchesTotal) {
  std::vector<double> x, y;
  for (int i = 0; i <= 1000; ++i) {
    x.push_back(i * 1e-3);
    y.push_back(std::exp(-x.back()));
  }
  double total = rmc::trapezoid(x, y);
  auto cum = rmc::cumulative_trapezoid(x, y);
  EXPECT_NEAR(cum.back(), total, 1e-14);
  EXPECT_NEAR(total, 1.0 - std::exp(-1.0), 1e-6);
}

TEST(Bisection, FindsThreshold) {
  double root = rmc::bisect_predicate([](double d) { return d >= 0.37; }, 0.0,
                                      1.0);
  EXPECT_NEAR(root, 0.37, 1e-12);
}
