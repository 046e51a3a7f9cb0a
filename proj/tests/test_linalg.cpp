#include "rmc/linalg.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using rmc::ComplexMatrix;
using rmc::RealMatrix;
using C = std::complex<double>;

namespace {

RealMatrix random_symmetric(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> g(0.0, 1.0);
  RealMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double v = g(gen);
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

ComplexMatrix random_hermitian(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix a(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = C(g(gen), 0.0);
    for (int j = 0; j < i; ++j) {
      C v(g(gen), g(gen));
      a(i, j) = v;
      a(j, i) = std::conj(v);
    }
  }
  return a;
}

}  // namespace

TEST(Matmul, MatchesNaiveOracle) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> g(0.0, 1.0);
  RealMatrix a(7, 5), b(9, 5);
  for (auto& v : a.data()) v = g(gen);
  for (auto& v : b.data()) v = g(gen);
  RealMatrix c = rmc::matmul_nt(a, b, 2);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 9; ++j) {
      double s = 0.0;
      for (int k = 0; k < 5; ++k) s += a(i, k) * b(j, k);
      EXPECT_NEAR(c(i, j), s, 1e-12);
    }
  EXPECT_THROW(rmc::matmul_nt(a, RealMatrix(3, 4)), std::invalid_argument);
}

TEST(EigenSymmetric, TridiagonalToeplitzClosedForm) {
  // Zero diagonal, unit off-diagonal: eigenvalues 2 cos(k pi / (n+1)).
  const int n = 60;
  RealMatrix a(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    a(i, i + 1) = 1.0;
    a(i + 1, i) = 1.0;
  }
  auto eig = rmc::eigen_symmetric(a);
  ASSERT_EQ(static_cast<int>(eig.values.size()), n);
  for (int k = 0; k < n; ++k) {
    double expected =
        2.0 * std::cos((n - k) * std::numbers::pi / (n + 1));  // ascending
    EXPECT_NEAR(eig.values[static_cast<std::size_t>(k)], expected, 1e-11);
  }
}

TEST(EigenSymmetric, SmallSizes) {
  RealMatrix a1(1, 1);
  a1(0, 0) = 3.5;
  EXPECT_EQ(rmc::eigen_symmetric(a1).values[0], 3.5);

  RealMatrix a2(2, 2);
  a2(0, 0) = 2.0;
  a2(1, 1) = 2.0;
  a2(0, 1) = a2(1, 0) = 1.0;
  auto e2 = rmc::eigen_symmetric(a2);
  EXPECT_NEAR(e2.values[0], 1.0, 1e-14);
  EXPECT_NEAR(e2.values[1], 3.0, 1e-14);
}

TEST(EigenSymmetric, TraceAndFrobeniusInvariants) {
  std::mt19937_64 gen(2);
  for (int n : {3, 17, 64}) {
    RealMatrix a = random_symmetric(n, gen);
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += a(i, i);
    double fro2 = 0.0;
    for (const auto& v : a.data()) fro2 += v * v;
    auto eig = rmc::eigen_symmetric(a);
    double sum = 0.0, sum2 = 0.0;
    for (double v : eig.values) {
      sum += v;
      sum2 += v * v;
    }
    EXPECT_NEAR(sum, trace, 1e-10 * (1.0 + std::abs(trace)));
    EXPECT_NEAR(sum2, fro2, 1e-9 * (1.0 + fro2));
  }
}

TEST(EigenSymmetric, ResidualContractWithVectors) {
  std::mt19937_64 gen(3);
  for (int n : {5, 40, 120}) {
    RealMatrix a = random_symmetric(n, gen);
    rmc::EigenOptions opt;
    opt.want_vectors = true;
    auto eig = rmc::eigen_symmetric(a, opt);
    ComplexMatrix ac(n, n), vc(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        ac(i, j) = a(i, j);
        vc(i, j) = eig.vectors(i, j);
      }
    double res = rmc::hermitian_residual(ac, eig.values, vc);
    EXPECT_LE(res, 1e-9 * rmc::frobenius_norm(a)) << "n=" << n;
  }
}

TEST(EigenSymmetric, ValuesOnlyAgreesWithVectorPath) {
  std::mt19937_64 gen(4);
  RealMatrix a = random_symmetric(50, gen);
  auto values_only = rmc::eigen_symmetric(a);
  rmc::EigenOptions opt;
  opt.want_vectors = true;
  auto with_vectors = rmc::eigen_symmetric(a, opt);
  for (std::size_t i = 0; i < values_only.values.size(); ++i)
    EXPECT_NEAR(values_only.values[i], with_vectors.values[i], 1e-11);
}

TEST(EigenHermitian, TwoByTwoClosedForm) {
  ComplexMatrix a(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 2.0;
  a(0, 1) = C(0.0, 1.0);
  a(1, 0) = C(0.0, -1.0);
  auto eig = rmc::eigen_hermitian(a);
  EXPECT_NEAR(eig.values[0], 1.0, 1e-13);
  EXPECT_NEAR(eig.values[1], 3.0, 1e-13);
}

TEST(EigenHermitian, ResidualContractWithVectors) {
  std::mt19937_64 gen(5);
  for (int n : {4, 30, 90}) {
    ComplexMatrix a = random_hermitian(n, gen);
    rmc::EigenOptions opt;
    opt.want_vectors = true;
    auto eig = rmc::eigen_hermitian(a, opt);
    double res = rmc::hermitian_residual(a, eig.values, eig.vectors);
    EXPECT_LE(res, 1e-9 * rmc::frobenius_norm(a)) << "n=" << n;
  }
}

TEST(EigenHermitian, RealInputTakesRealPathConsistently) {
  std::mt19937_64 gen(6);
  RealMatrix a = random_symmetric(35, gen);
  ComplexMatrix ac(35, 35);
  for (int i = 0; i < 35; ++i)
    for (int j = 0; j < 35; ++j) ac(i, j) = a(i, j);
  auto real_eig = rmc::eigen_symmetric(a);
  auto herm_eig = rmc::eigen_hermitian(ac);
  for (std::size_t i = 0; i < real_eig.values.size(); ++i)
    EXPECT_EQ(real_eig.values[i], herm_eig.values[i]);
}

TEST(EigenHermitian, SkewStructureSpectrum) {
  // -iS for the 2x2 rotation generator has eigenvalues -+1.
  ComplexMatrix h(2, 2);
  h(0, 1) = C(0.0, -1.0);  // -i * 1
  h(1, 0) = C(0.0, 1.0);   // -i * (-1)
  auto eig = rmc::eigen_hermitian(h);
  EXPECT_NEAR(eig.values[0], -1.0, 1e-14);
  EXPECT_NEAR(eig.values[1], 1.0, 1e-14);
}

TEST(Fingerprint, DeterministicAndShapeSensitive) {
  RealMatrix a(3, 3), b(3, 3);
  a(1, 2) = 0.5;
  b(1, 2) = 0.5;
  EXPECT_EQ(rmc::matrix_fingerprint(a), rmc::matrix_fingerprint(b));
  b(1, 2) = 0.25;
  EXPECT_NE(rmc::matrix_fingerprint(a), rmc::matrix_fingerprint(b));
  EXPECT_EQ(rmc::matrix_fingerprint(a).size(), 16u);
}
