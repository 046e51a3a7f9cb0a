#pragma once

#include <complex>
#include <stdexcept>

#include "rmc/errors.hpp"

namespace rmc {

using Complex = std::complex<double>;

/// Which of the two rational kernels a computation uses. The skew kernel
/// pairs with measures on the imaginary axis and transforms defined on the
/// open left half-plane; the hermitian kernel pairs with measures on the
/// real axis and the open upper half-plane.
enum class Kernel { skew, hermitian };

inline const char* kernel_name(Kernel k) {
  return k == Kernel::skew ? "skew" : "hermitian";
}

namespace detail {

// Callers are guaranteed to stay away from the kernel poles, so proximity
// indicates a solver bug and must fail loudly.
constexpr double kPoleGuard = 1e-12;

inline void guard_pole(Complex z, Complex pole) {
  if (std::abs(z - pole) < kPoleGuard)
    throw std::domain_error(msg("kernel argument within pole guard of (",
                                pole.real(), ",", pole.imag(), ")"));
}

}  // namespace detail

/// rho(z) = 1/(i+z) + 1/(-i+z). Poles at +-i.
inline Complex rho(Complex z) {
  const Complex i(0.0, 1.0);
  detail::guard_pole(z, i);
  detail::guard_pole(z, -i);
  return 1.0 / (i + z) + 1.0 / (-i + z);
}

/// rho2(z) = 1/|i+z|^2 + 1/|-i+z|^2. Strictly positive on its domain;
/// satisfies Re(rho(z)) = rho2(z) * Re(z).
inline double rho2(Complex z) {
  const Complex i(0.0, 1.0);
  detail::guard_pole(z, i);
  detail::guard_pole(z, -i);
  return 1.0 / std::norm(i + z) + 1.0 / std::norm(-i + z);
}

/// sigma(z) = 1/(1+z) + 1/(-1+z). Poles at +-1.
inline Complex sigma(Complex z) {
  detail::guard_pole(z, Complex(1.0, 0.0));
  detail::guard_pole(z, Complex(-1.0, 0.0));
  return 1.0 / (1.0 + z) + 1.0 / (-1.0 + z);
}

/// sigma2(z) = 1/|1+z|^2 + 1/|-1+z|^2. Strictly positive; satisfies
/// Im(sigma(z)) = -Im(z) * sigma2(z).
inline double sigma2(Complex z) {
  detail::guard_pole(z, Complex(1.0, 0.0));
  detail::guard_pole(z, Complex(-1.0, 0.0));
  return 1.0 / std::norm(1.0 + z) + 1.0 / std::norm(-1.0 + z);
}

/// Kernel dispatch: rho for skew, sigma for hermitian.
inline Complex kernel_value(Kernel k, Complex z) {
  return k == Kernel::skew ? rho(z) : sigma(z);
}

/// Modulus companion dispatch: rho2 for skew, sigma2 for hermitian.
inline double kernel_modulus(Kernel k, Complex z) {
  return k == Kernel::skew ? rho2(z) : sigma2(z);
}

/// Analytic derivative of the kernel, used by the Newton fallback.
inline Complex kernel_derivative(Kernel k, Complex z) {
  if (k == Kernel::skew) {
    const Complex i(0.0, 1.0);
    detail::guard_pole(z, i);
    detail::guard_pole(z, -i);
    Complex a = i + z, b = -i + z;
    return -1.0 / (a * a) - 1.0 / (b * b);
  }
  detail::guard_pole(z, Complex(1.0, 0.0));
  detail::guard_pole(z, Complex(-1.0, 0.0));
  Complex a = 1.0 + z, b = -1.0 + z;
  return -1.0 / (a * a) - 1.0 / (b * b);
}

}  // namespace rmc
