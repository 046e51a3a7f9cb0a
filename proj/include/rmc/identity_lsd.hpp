#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "rmc/errors.hpp"
#include "rmc/kernels.hpp"
#include "rmc/measures.hpp"

namespace rmc {

/// Coefficients of the functional cubic for the identity-covariance LSD,
///   c^2 z m^3 + (c^2 - 2c) m^2 + z m + 1 = 0,
/// after depression to t^3 + 3 Q(z) t - 2 R(z) = 0 with
///   Q(z) = q0 + q2 / z^2,   R(z) = r1 / z + r3 / z^3,
/// plus the coefficients of d(x) = d0 - d2/x^2 + d4/x^4 controlling where
/// the boundary discriminant is negative.
struct CardanoCoefficients {
  double c;
  double q0, q2;
  double r1, r3;
  double d0, d2, d4;

  Complex q_of(Complex z) const { return q0 + q2 / (z * z); }
  Complex r_of(Complex z) const { return r1 / z + r3 / (z * z * z); }
};

inline CardanoCoefficients coefficients(double c) {
  if (!(c > 0.0))
    throw std::domain_error("coefficients: concentration c must be > 0");
  CardanoCoefficients k;
  k.c = c;
  const double c2 = c * c, c3 = c2 * c, c6 = c3 * c3;
  k.q0 = 1.0 / (3.0 * c2);
  k.q2 = -(c - 2.0) * (c - 2.0) / (9.0 * c2);
  k.r1 = -(c + 1.0) / (3.0 * c3);
  k.r3 = -std::pow(c - 2.0, 3) / (27.0 * c3);
  k.d0 = 1.0 / (27.0 * c6);
  k.d2 = (2.0 * c2 + 10.0 * c - 1.0) / (27.0 * c6);
  k.d4 = std::pow(1.0 - 2.0 / c, 3) / (27.0 * c2);
  return k;
}

/// Support of the absolutely continuous part: [L, U] with L = sqrt(R_-) when
/// R_- > 0 (which happens exactly for c > 2) and U = sqrt(R_+), where R_+-
/// are the roots of d0 y^2 - d2 y + d4. Includes the point mass at zero for
/// the identity spectrum (beta = 1).
struct SupportSpec {
  double c;
  double r_plus, r_minus;
  double lower, upper;  // L, U
  double point_mass_zero;
};

inline SupportSpec support(double c) {
  CardanoCoefficients k = coefficients(c);
  SupportSpec s;
  s.c = c;
  double disc = std::sqrt(k.d2 * k.d2 - 4.0 * k.d0 * k.d4);
  s.r_plus = (k.d2 + disc) / (2.0 * k.d0);
  s.r_minus = (k.d2 - disc) / (2.0 * k.d0);
  s.lower = s.r_minus > 0.0 ? std::sqrt(s.r_minus) : 0.0;
  s.upper = std::sqrt(s.r_plus);
  s.point_mass_zero = std::max(0.0, 1.0 - 2.0 / c);
  return s;
}

struct RqdValues {
  double r_abs;  // |r(x)|, the boundary limit of R is i sgn(x) |r(x)|
  double q;      // boundary limit of Q, positive for all x != 0
  double d;      // d(x) = r(x)^2 + q(x)^3 = d0 - d2/x^2 + d4/x^4
};

/// Boundary values r, q, d at axis coordinate x != 0.
inline RqdValues rqd_at(double x, const CardanoCoefficients& k) {
  if (x == 0.0) throw std::domain_error("rqd_at: x must be nonzero");
  const double ax = std::abs(x), x2 = x * x;
  RqdValues v;
  v.r_abs = std::abs(-k.r1 / ax + k.r3 / (ax * ax * ax));
  v.q = k.q0 - k.q2 / x2;
  v.d = k.d0 - k.d2 / x2 + k.d4 / (x2 * x2);
  return v;
}

/// Full breakdown of one density evaluation at x != 0. On the support
/// V+ > V- > 0 with V+ V- = q^3; off the support d >= 0 and f = 0.
struct DensityEval {
  double x;
  double r_abs, q, d;
  double v_plus, v_minus;
  double f;
};

inline DensityEval density_eval(double x, double c) {
  CardanoCoefficients k = coefficients(c);
  RqdValues v = rqd_at(x, k);
  DensityEval e;
  e.x = x;
  e.r_abs = v.r_abs;
  e.q = v.q;
  e.d = v.d;
  if (v.d >= 0.0) {
    e.v_plus = e.v_minus = v.r_abs;
    e.f = 0.0;
    return e;
  }
  // V- = |r| - sqrt(-d) cancels catastrophically near x = 0 where both
  // terms blow up like 1/|x|^3; the product identity V+ V- = q^3 is exact
  // and stable, so divide instead of subtracting.
  e.v_plus = v.r_abs + std::sqrt(-v.d);
  e.v_minus = std::max(0.0, v.q * v.q * v.q / e.v_plus);
  e.f = std::numbers::sqrt3 / (2.0 * std::numbers::pi) *
        (std::cbrt(e.v_plus) - std::cbrt(e.v_minus));
  return e;
}

/// Density of the identity-covariance LSD at axis coordinate x.
/// At x = 0: 1/(pi sqrt(2c - c^2)) for 0 < c < 2, +infinity exactly at
/// c = 2 (the density diverges there), and 0 for c > 2 where the mass at
/// zero is an atom handled separately.
inline double density(double x, double c) {
  if (!(c > 0.0)) throw std::domain_error("density: c must be > 0");
  if (x == 0.0) {
    if (c < 2.0) return 1.0 / (std::numbers::pi * std::sqrt(2.0 * c - c * c));
    if (c == 2.0) return std::numeric_limits<double>::infinity();
    return 0.0;
  }
  return density_eval(x, c).f;
}

/// The three functional roots of c^2 z m^3 + (c^2-2c) m^2 + z m + 1 = 0 by
/// Cardano's method. The cube root uses the principal branch; any branch
/// choice only permutes the returned multiset.
inline std::array<Complex, 3> cardano_roots(Complex z, double c) {
  if (z == Complex(0.0, 0.0))
    throw std::domain_error("cardano_roots: z must be nonzero");
  CardanoCoefficients k = coefficients(c);
  const Complex q = k.q_of(z);
  const Complex r = k.r_of(z);
  const Complex sq = std::sqrt(r * r + q * q * q);
  // Pick the larger-magnitude cube to avoid cancellation in R -+ sqrt(D).
  Complex s_cubed = r + sq;
  if (std::abs(r - sq) > std::abs(s_cubed)) s_cubed = r - sq;
  Complex s0, t0;
  if (s_cubed == Complex(0.0, 0.0)) {
    s0 = t0 = Complex(0.0, 0.0);  // triple root at the offset
  } else {
    s0 = std::pow(s_cubed, 1.0 / 3.0);
    t0 = -q / s0;
  }
  const Complex offset = -(1.0 - 2.0 / c) / (3.0 * z);
  const Complex w1(-0.5, 0.5 * std::numbers::sqrt3);
  const Complex w2 = std::conj(w1);
  std::array<Complex, 3> roots = {offset + s0 + t0, offset + w1 * s0 + w2 * t0,
                                  offset + w2 * s0 + w1 * t0};
  // One Newton polish per root pins the residual at roundoff level.
  const double c2 = c * c;
  for (Complex& m : roots) {
    Complex p = c2 * z * m * m * m + (c2 - 2.0 * c) * m * m + z * m + 1.0;
    Complex dp = 3.0 * c2 * z * m * m + 2.0 * (c2 - 2.0 * c) * m + z;
    if (std::abs(dp) > 1e-300) m -= p / dp;
  }
  return roots;
}

/// Selects the Stieltjes-transform root: the unique one with positive real
/// part for z in the left half-plane. Zero or multiple candidates signal a
/// numerical failure near the support.
inline Complex select_stieltjes_root(const std::array<Complex, 3>& roots,
                                     const HalfPlanePoint& z) {
  if (z.half_plane != HalfPlane::left)
    throw std::domain_error("select_stieltjes_root: z must lie in C_L");
  int count = 0;
  Complex selected;
  for (const Complex& m : roots)
    if (m.real() > 1e-10) {
      ++count;
      selected = m;
    }
  if (count != 1)
    throw RootSelectionAmbiguity(detail::msg(
        "expected exactly one root with positive real part at z=(",
        z.value.real(), ",", z.value.imag(), "), found ", count));
  return selected;
}

/// Closed-form Stieltjes transform of the identity-covariance LSD.
/// Skew: the positive-real-part cubic root at z in C_L. Hermitian: the
/// transform on C+ obtained through the axis rotation s+(z) = i s(i z),
/// which maps the skew problem onto the hermitian one.
inline Complex identity_stieltjes(Complex z, double c,
                                  Kernel kernel = Kernel::skew) {
  if (kernel == Kernel::hermitian) {
    const Complex i(0.0, 1.0);
    return i * identity_stieltjes(i * z, c, Kernel::skew);
  }
  return select_stieltjes_root(cardano_roots(z, c), left_point(z));
}

/// Closed-form LSD curve on a symmetric grid spanning [-U, U].
/// The hermitian curve carries the identical density on the real axis.
inline LsdCurve identity_curve(double c, Kernel kernel = Kernel::skew,
                               int points = 2001) {
  if (points < 3) throw std::invalid_argument("identity_curve: points >= 3");
  if (points % 2 == 0) ++points;  // keep 0 on the grid
  SupportSpec s = support(c);
  std::vector<double> grid(static_cast<std::size_t>(points));
  std::vector<double> f(grid.size());
  const int half = points / 2;
  for (int j = 0; j < points; ++j) {
    double x = s.upper * static_cast<double>(j - half) / half;
    if (j == half) x = 0.0;
    grid[static_cast<std::size_t>(j)] = x;
    double val = density(x, c);
    // c == 2 diverges at the origin; record the (integrable) spike via its
    // neighbors rather than an infinite sample.
    if (std::isinf(val)) val = density(s.upper / half * 0.5, c);
    f[static_cast<std::size_t>(j)] = val;
  }
  return LsdCurve::build(c, kernel, std::move(grid), std::move(f),
                         s.point_mass_zero, s.lower, s.upper);
}

/// Total mass of the absolutely continuous part by adaptive quadrature,
/// with a smoothstep change of variables that flattens the square-root
/// vanishing at the support endpoints.
inline double integrate_identity_density(double c, double tol = 1e-9) {
  SupportSpec s = support(c);
  auto g = [&](double t) {
    double x = s.lower + (s.upper - s.lower) * (3.0 - 2.0 * t) * t * t;
    double dx = (s.upper - s.lower) * 6.0 * t * (1.0 - t);
    if (dx == 0.0) return 0.0;  // endpoint; the c = 2 spike is integrable
    return density(x, c) * dx;
  };
  return 2.0 * integrate_adaptive(g, 0.0, 1.0, tol);
}

}  // namespace rmc
