#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "rmc/errors.hpp"
#include "rmc/kernels.hpp"
#include "rmc/measures.hpp"
#include "rmc/numerics.hpp"

namespace rmc {

struct FixedPointConfig {
  double tol = 1e-12;       // residual |h - G(h)|
  int max_iter = 2000;
  double damping = 0.5;     // Picard under-relaxation in (0, 1]
  bool newton_fallback = true;
  std::optional<Complex> initial_h;  // auto when absent

  void validate() const {
    if (!(tol >= 1e-14))
      throw std::invalid_argument("FixedPointConfig: tol must be >= 1e-14");
    if (!(damping > 0.0 && damping <= 1.0))
      throw std::invalid_argument("FixedPointConfig: damping must be in (0,1]");
    if (max_iter < 1)
      throw std::invalid_argument("FixedPointConfig: max_iter must be >= 1");
  }
};

/// Converged solution of the functional equation at one argument.
/// i1, i2 are the weighted integrals I_k = int lambda^k dH / |-z + lambda
/// K(c h)|^2 and gamma = c * K2(c h) * i2 is the contraction diagnostic,
/// strictly below 1 at any admissible solution.
struct FixedPointSolution {
  HalfPlanePoint z;
  Complex h;
  Complex s;
  double residual = 0.0;
  int iterations = 0;
  double gamma = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
};

/// Stieltjes transform recovered algebraically from a converged h:
///   skew:      s = (1/z)(2/c - 1) + (1/(i c z)) (1/(i + ch) - 1/(-i + ch))
///   hermitian: s = (1/z)(2/c - 1) + (1/(c z))  (1/(-1 + ch) - 1/(1 + ch))
inline Complex stieltjes_s(Complex z, double c, Complex h, Kernel kernel) {
  const Complex ch = c * h;
  const Complex lead = (2.0 / c - 1.0) / z;
  if (kernel == Kernel::skew) {
    const Complex i(0.0, 1.0);
    return lead + (1.0 / (i + ch) - 1.0 / (-i + ch)) / (i * c * z);
  }
  return lead + (1.0 / (-1.0 + ch) - 1.0 / (1.0 + ch)) / (c * z);
}

namespace detail {

inline bool in_half_plane(Complex h, Kernel kernel) {
  return kernel == Kernel::skew ? h.real() > 0.0 : h.imag() > 0.0;
}

// One application of the fixed-point map G(h) = int lambda dH / (-z +
// lambda K(c h)).
inline Complex fp_map(Complex h, Complex z, double c, Kernel kernel,
                      const SpectralMeasure& H) {
  Complex kv = kernel_value(kernel, c * h);
  Complex g(0.0, 0.0);
  for (const auto& a : H.atoms())
    g += a.weight * a.location / (-z + a.location * kv);
  return g;
}

// d/dh of the fixed-point map, for the Newton fallback.
inline Complex fp_map_derivative(Complex h, Complex z, double c, Kernel kernel,
                                 const SpectralMeasure& H) {
  Complex kv = kernel_value(kernel, c * h);
  Complex kd = kernel_derivative(kernel, c * h);
  Complex acc(0.0, 0.0);
  for (const auto& a : H.atoms()) {
    Complex den = -z + a.location * kv;
    acc += a.weight * a.location * a.location / (den * den);
  }
  return -c * kd * acc;
}

}  // namespace detail

/// Solves h = int lambda dH(lambda) / (-z + lambda K(c h)) for the unique h
/// in the open right half-plane (skew kernel, z in C_L) or upper half-plane
/// (hermitian kernel, z in C+).
///
/// Iteration is damped Picard with a Newton fallback on F(h) = h - G(h).
/// Picard steps can never leave the half-plane (G maps it into itself for
/// admissible z), so only Newton steps are backtracked. Non-convergence
/// raises NoConvergence carrying the best iterate; no alternative scheme is
/// tried silently.
inline FixedPointSolution solve_h(const HalfPlanePoint& z, double c,
                                  const SpectralMeasure& H, Kernel kernel,
                                  const FixedPointConfig& cfg = {}) {
  cfg.validate();
  if (!(c > 0.0)) throw std::domain_error("solve_h: c must be > 0");
  if (H.degenerate())
    throw DegenerateSpectrum(
        "solve_h: H = delta_0 has no fixed point; the LSD is delta_0");
  if (z.half_plane != half_plane_of(kernel))
    throw std::domain_error("solve_h: z half-plane does not match kernel");
  const Complex zv = z.value;

  // Auto initialization: one undamped map step from the safe interior point
  // w0 = 1 (skew) or i (hermitian); the image lies in the correct half-plane
  // for every admissible (z, c, H).
  Complex h;
  if (cfg.initial_h) {
    h = *cfg.initial_h;
    if (!detail::in_half_plane(h, kernel))
      throw std::domain_error("solve_h: initial_h outside the open half-plane");
  } else {
    Complex w0 = kernel == Kernel::skew ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
    Complex kv = kernel_value(kernel, c * w0);
    h = Complex(0.0, 0.0);
    for (const auto& a : H.atoms())
      h += a.weight * a.location / (-zv + a.location * kv);
  }

  Complex best_h = h;
  double best_res = std::numeric_limits<double>::infinity();
  // Newton is a local accelerator: fired near a solution or when Picard
  // stalls, and suppressed for a while after a rejected attempt so the
  // global Picard dynamics are free to leave spurious |F| valleys near the
  // half-plane boundary (no true fixed point lies there).
  constexpr int kStallWindow = 20;
  constexpr int kNewtonCooldown = 25;
  double res_history[kStallWindow] = {};
  int cooldown = 0;
  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    Complex g = detail::fp_map(h, zv, c, kernel, H);
    double res = std::abs(h - g);
    if (res < best_res) {
      best_res = res;
      best_h = h;
    }
    if (res <= cfg.tol) break;

    bool stalled = iter >= kStallWindow &&
                   res > 0.99 * res_history[iter % kStallWindow];
    res_history[iter % kStallWindow] = res;
    if (cooldown > 0) --cooldown;

    bool stepped = false;
    if (cfg.newton_fallback && cooldown == 0 &&
        (stalled || res < 1e-2 * (1.0 + std::abs(h)))) {
      Complex dG = detail::fp_map_derivative(h, zv, c, kernel, H);
      Complex dF = 1.0 - dG;
      if (std::abs(dF) > 1e-300) {
        Complex full = -(h - g) / dF;
        double t = 1.0;
        for (int bt = 0; bt < 8 && !stepped; ++bt, t *= 0.5) {
          Complex cand = h + t * full;
          if (!detail::in_half_plane(cand, kernel)) continue;
          Complex gc = detail::fp_map(cand, zv, c, kernel, H);
          // The decrease must be decisive. |F| has root-free local minima
          // (F' = 0 points) whose marginal improvements would otherwise
          // capture the iteration and stall the global Picard dynamics.
          if (std::abs(cand - gc) < 0.5 * res) {
            h = cand;
            stepped = true;
          }
        }
      }
      if (!stepped) cooldown = kNewtonCooldown;
    }
    if (!stepped) h += cfg.damping * (g - h);
  }

  Complex g = detail::fp_map(h, zv, c, kernel, H);
  double res = std::abs(h - g);
  if (res > cfg.tol) {
    if (best_res <= cfg.tol) {
      h = best_h;
      res = best_res;
    } else {
      throw NoConvergence(
          detail::msg("solve_h: no convergence at z=(", zv.real(), ",",
                      zv.imag(), "), best residual ", best_res),
          best_h, best_res, iter);
    }
  }

  FixedPointSolution sol{z, h, stieltjes_s(zv, c, h, kernel), res, iter};
  Complex kv = kernel_value(kernel, c * h);
  for (const auto& a : H.atoms()) {
    double m = a.weight * a.location / std::norm(-zv + a.location * kv);
    sol.i1 += m;
    sol.i2 += m * a.location;
  }
  sol.gamma = c * kernel_modulus(kernel, c * h) * sol.i2;
  return sol;
}

/// Point mass at zero of the LSD when H = (1 - beta) delta_0 + beta H_1:
/// 1 - beta below the threshold c = 2/beta, and 1 - 2/c at or above it.
/// Continuous across the threshold.
inline double point_mass_zero_analytic(double beta, double c) {
  if (!(beta > 0.0))
    throw DegenerateSpectrum("point_mass_zero_analytic: beta = 0 is delta_0");
  if (!(beta <= 1.0))
    throw std::domain_error("point_mass_zero_analytic: beta must be in (0,1]");
  if (!(c > 0.0))
    throw std::domain_error("point_mass_zero_analytic: c must be > 0");
  return c < 2.0 / beta ? 1.0 - beta : 1.0 - 2.0 / c;
}

/// Limit of h(-eps) as eps -> 0: sqrt(beta / (c (2 - c beta))) below the
/// point-mass threshold, +infinity at or above it.
inline double h_limit_at_zero(double beta, double c) {
  if (!(beta > 0.0))
    throw DegenerateSpectrum("h_limit_at_zero: beta = 0 is delta_0");
  if (!(c > 0.0)) throw std::domain_error("h_limit_at_zero: c must be > 0");
  if (c >= 2.0 / beta) return std::numeric_limits<double>::infinity();
  return std::sqrt(beta / (c * (2.0 - c * beta)));
}

struct GridSpec {
  int points = 801;          // grid size; forced odd so 0 is a node
  double half_width = 0.0;   // 0 = auto-bracket from the operator-norm bound
  std::vector<double> eps_schedule = default_eps_schedule();
};

namespace detail {

// Stieltjes transform of the LSD at z through a fresh fixed-point solve,
// warm-started from a neighboring solution when available.
inline Complex lsd_transform(Complex z, double c, const SpectralMeasure& H,
                             Kernel kernel, const FixedPointConfig& base,
                             std::optional<Complex>& warm) {
  FixedPointConfig cfg = base;
  cfg.initial_h = warm;
  HalfPlanePoint zp(z, half_plane_of(kernel));
  FixedPointSolution sol = solve_h(zp, c, H, kernel, cfg);
  warm = sol.h;
  return sol.s;
}

inline void parallel_chunks(std::size_t n, int threads,
                            const std::function<void(std::size_t, std::size_t)>& body) {
  if (threads < 2 || n < 2) {
    body(0, n);
    return;
  }
  std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  std::size_t chunk = (n + nt - 1) / nt;
  for (std::size_t t = 0; t < nt; ++t) {
    std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([=] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Numeric LSD curve for a general covariance spectrum: densities by
/// boundary extrapolation of the solved transform on a symmetric grid,
/// point mass at zero by the epsilon * s limit (cross-checked against the
/// analytic law for the declared beta split).
///
/// Grid points are independent solves, parallelized without shared state;
/// results do not depend on the scheduling. Solver failures are collected
/// per grid point and reported together.
inline LsdCurve lsd_curve(double c, const SpectralMeasure& H, Kernel kernel,
                          const GridSpec& grid_spec = {},
                          const FixedPointConfig& cfg = {}, int threads = 1) {
  cfg.validate();
  if (H.degenerate())
    throw DegenerateSpectrum("lsd_curve: H = delta_0; the LSD is delta_0");
  if (grid_spec.points < 3)
    throw std::invalid_argument("lsd_curve: need at least 3 grid points");
  if (grid_spec.eps_schedule.size() < 2)
    throw std::invalid_argument("lsd_curve: eps schedule needs >= 2 entries");

  // Point mass at zero by the eps * s boundary limit, computed first: the
  // density inversion then works on the transform with the atom's own
  // contribution -pm/z removed, which otherwise diverges like pm/eps at
  // the x = 0 node and pollutes extrapolation near it.
  double point_mass;
  {
    std::optional<Complex> warm;
    std::vector<double> pm_vals(grid_spec.eps_schedule.size());
    for (std::size_t k = 0; k < pm_vals.size(); ++k) {
      double eps = grid_spec.eps_schedule[k];
      Complex z =
          kernel == Kernel::skew ? Complex(-eps, 0.0) : Complex(0.0, eps);
      Complex s = detail::lsd_transform(z, c, H, kernel, cfg, warm);
      pm_vals[k] = eps * (kernel == Kernel::skew ? s.real() : s.imag());
    }
    Extrapolated pm =
        extrapolate_to_zero(grid_spec.eps_schedule, pm_vals, 1e-3);
    point_mass = std::clamp(pm.value, 0.0, 1.0 - 1e-15);
    // Cross-check against the analytic law for the declared beta split; a
    // large gap means the extrapolation failed, not the law.
    double analytic = point_mass_zero_analytic(H.beta(), c);
    if (std::abs(point_mass - analytic) > 0.05)
      throw CurveSolverFailure(
          detail::msg("lsd_curve: numeric point mass ", point_mass,
                      " far from analytic value ", analytic),
          {0.0});
  }

  auto density_at = [&](double x, Extrapolated& out) {
    std::optional<Complex> warm;  // warm-start across the eps sweep only
    std::vector<double> vals(grid_spec.eps_schedule.size());
    for (std::size_t k = 0; k < vals.size(); ++k) {
      double eps = grid_spec.eps_schedule[k];
      Complex z = kernel == Kernel::skew ? Complex(-eps, x) : Complex(x, eps);
      Complex s = detail::lsd_transform(z, c, H, kernel, cfg, warm);
      s += point_mass / z;  // remove the atom's transform -pm/z
      vals[k] = (kernel == Kernel::skew ? s.real() : s.imag()) /
                std::numbers::pi;
    }
    out = extrapolate_to_zero(grid_spec.eps_schedule, vals, 1e-3);
  };

  // Auto-bracketing: start from the operator-norm bound 2 (1 + sqrt(c))^2
  // lambda_max and widen until the tail density is negligible.
  double half_width = grid_spec.half_width;
  if (half_width <= 0.0) {
    double s = 1.0 + std::sqrt(c);
    half_width = 2.0 * s * s * H.max_location();
    for (int tries = 0; tries < 20; ++tries) {
      Extrapolated tail;
      density_at(half_width, tail);
      if (std::abs(tail.value) < 1e-8) break;
      half_width *= 1.5;
    }
  }

  int points = grid_spec.points | 1;  // odd, so x = 0 is a node
  std::vector<double> grid(static_cast<std::size_t>(points));
  const int half = points / 2;
  for (int j = 0; j < points; ++j)
    grid[static_cast<std::size_t>(j)] =
        j == half ? 0.0 : half_width * static_cast<double>(j - half) / half;

  std::vector<double> f(grid.size(), 0.0);
  std::vector<char> failed(grid.size(), 0);
  detail::parallel_chunks(
      grid.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) {
          try {
            Extrapolated e;
            density_at(grid[j], e);
            f[j] = std::max(0.0, e.value);
          } catch (const NoConvergence&) {
            failed[j] = 1;
          }
        }
      });
  std::vector<double> failed_points;
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (failed[j]) failed_points.push_back(grid[j]);
  if (!failed_points.empty())
    throw CurveSolverFailure(
        detail::msg("lsd_curve: solver failed at ", failed_points.size(),
                    " grid points"),
        failed_points);

  // Support estimate from the computed densities.
  double upper = 0.0;
  double lower = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (f[j] > 1e-8) upper = std::max(upper, std::abs(grid[j]));
  if (point_mass > 0.0 || f[static_cast<std::size_t>(half)] < 1e-8) {
    lower = upper;
    for (std::size_t j = 0; j < grid.size(); ++j)
      if (f[j] > 1e-8) lower = std::min(lower, std::abs(grid[j]));
    if (lower >= upper) lower = 0.0;
  }

  return LsdCurve::build(c, kernel, std::move(grid), std::move(f), point_mass,
                         lower, upper);
}

/// The LSD of the degenerate spectrum H = delta_0: the full point mass at
/// zero, with no iteration involved. This is the boundary object excluded
/// by the LsdCurve invariants (its atom carries mass 1), so callers opt in
/// knowingly and skip validate().
inline LsdCurve delta0_curve(Kernel kernel, double c) {
  std::vector<double> grid = {-1.0, 0.0, 1.0};
  std::vector<double> density = {0.0, 0.0, 0.0};
  return LsdCurve::build(c, kernel, std::move(grid), std::move(density), 1.0,
                         0.0, 0.0);
}

}  // namespace rmc
