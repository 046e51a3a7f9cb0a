#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace rmc {

/// Result of a limit estimate from a decreasing epsilon schedule.
/// `error` is the internal consistency estimate of the extrapolation;
/// `converged` is false when that estimate exceeds the caller's tolerance,
/// so a bad sequence is flagged rather than silently accepted.
struct Extrapolated {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

/// Polynomial extrapolation of samples (eps[i], val[i]) to eps -> 0
/// (Neville tableau evaluated at zero). Works for any strictly decreasing
/// positive schedule; a geometric schedule with two or more points gives
/// successive Richardson elimination of the leading error orders.
inline Extrapolated extrapolate_to_zero(std::span<const double> eps,
                                        std::span<const double> val,
                                        double flag_tol = 1e-3) {
  const std::size_t n = eps.size();
  if (n != val.size() || n < 2)
    throw std::invalid_argument("extrapolate_to_zero: need >= 2 samples");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(eps[i] > eps[i + 1]) || !(eps[i + 1] > 0.0))
      throw std::invalid_argument(
          "extrapolate_to_zero: schedule must be decreasing positives");

  std::vector<double> t(val.begin(), val.end());
  double prev_top = t[0];
  double last_correction = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i + j < n; ++i)
      t[i] = (eps[i + j] * t[i] - eps[i] * t[i + 1]) / (eps[i + j] - eps[i]);
    last_correction = std::abs(t[0] - prev_top);
    prev_top = t[0];
  }
  Extrapolated out;
  out.value = t[0];
  // Consistency estimate: size of the final Neville correction plus the
  // spread of the highest completed column.
  out.error = last_correction + (n >= 3 ? std::abs(t[0] - t[1]) : 0.0);
  out.converged = out.error <= flag_tol;
  return out;
}

namespace detail {

inline double simpson_recurse(const std::function<double(double)>& f, double a,
                              double b, double fa, double fm, double fb,
                              double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature on [a, b].
inline double integrate_adaptive(const std::function<double(double)>& f,
                                 double a, double b, double tol = 1e-10,
                                 int max_depth = 40) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Trapezoidal integral of samples (x[i], y[i]) on a strictly increasing grid.
inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("trapezoid: need matching grids, >= 2 points");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    sum += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
  return sum;
}

/// Running trapezoidal integral; out[0] = 0.
inline std::vector<double> cumulative_trapezoid(std::span<const double> x,
                                                std::span<const double> y) {
  if (x.size() != y.size() || x.empty())
    throw std::invalid_argument("cumulative_trapezoid: grid mismatch");
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return out;
}

/// Bisection for the smallest argument where a monotone predicate turns true.
/// `lo` must evaluate false and `hi` true.
inline double bisect_predicate(const std::function<bool(double)>& pred,
                               double lo, double hi, int iters = 60) {
  for (int i = 0; i < iters; ++i) {
    double mid = 0.5 * (lo + hi);
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace rmc
