#pragma once

#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmc {

/// The covariance spectrum is (or is equivalent to) the point mass at zero.
/// No fixed-point problem exists in that case; the limiting spectral
/// distribution is itself the point mass at zero.
class DegenerateSpectrum : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Fixed-point solve exhausted its iteration budget. Carries the best
/// iterate seen and its residual so callers can inspect how close it got.
class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(const std::string& what, std::complex<double> best_iterate,
                double residual, int iterations)
      : std::runtime_error(what),
        best_iterate(best_iterate),
        residual(residual),
        iterations(iterations) {}

  std::complex<double> best_iterate;
  double residual;
  int iterations;
};

/// Root selection found zero or more than one candidate with positive real
/// part. Signals a numerical failure near the support boundary.
class RootSelectionAmbiguity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eigensolver did not converge; message carries the matrix fingerprint.
class EigensolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One or more grid points of a density sweep failed to converge.
class CurveSolverFailure : public std::runtime_error {
 public:
  CurveSolverFailure(const std::string& what, std::vector<double> points)
      : std::runtime_error(what), failed_points(std::move(points)) {}

  std::vector<double> failed_points;
};

namespace detail {

template <typename... Args>
std::string msg(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

}  // namespace detail

}  // namespace rmc
