#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rmc/errors.hpp"
#include "rmc/kernels.hpp"
#include "rmc/numerics.hpp"

namespace rmc {

/// Open half-plane a transform argument must lie in: the left half-plane
/// (Re < 0) for the skew case, the upper half-plane (Im > 0) for the
/// hermitian case.
enum class HalfPlane { left, upper };

inline HalfPlane half_plane_of(Kernel k) {
  return k == Kernel::skew ? HalfPlane::left : HalfPlane::upper;
}

/// A complex point validated to lie strictly inside its declared open
/// half-plane.
struct HalfPlanePoint {
  HalfPlanePoint(Complex v, HalfPlane hp) : value(v), half_plane(hp) {
    bool ok = (hp == HalfPlane::left) ? v.real() < 0.0 : v.imag() > 0.0;
    if (!ok)
      throw std::domain_error(detail::msg(
          "point (", v.real(), ",", v.imag(), ") not strictly inside the ",
          hp == HalfPlane::left ? "left" : "upper", " half-plane"));
  }

  Complex value;
  HalfPlane half_plane;
};

inline HalfPlanePoint left_point(Complex v) {
  return HalfPlanePoint(v, HalfPlane::left);
}
inline HalfPlanePoint upper_point(Complex v) {
  return HalfPlanePoint(v, HalfPlane::upper);
}

struct SpectralAtom {
  double location;
  double weight;
};

/// The limiting covariance spectrum H on the nonnegative reals: a finite
/// list of atoms plus an explicit mass at zero.
///
/// The zero_mass field is the declared (1 - beta) component of
/// H = (1 - beta) delta_0 + beta H_1. Downstream point-mass formulas use
/// beta() = 1 - zero_mass and never infer the split from atoms located at or
/// near zero; callers who put weight on a zero-location atom own that choice.
///
/// Absolutely continuous spectra are approximated by quantile
/// discretization, see from_quantiles().
class SpectralMeasure {
 public:
  SpectralMeasure(std::vector<SpectralAtom> atoms, double zero_mass = 0.0)
      : atoms_(std::move(atoms)), zero_mass_(zero_mass) {
    validate();
  }

  /// H = delta_location. Pass 0 for the degenerate spectrum delta_0.
  static SpectralMeasure point(double location) {
    return SpectralMeasure({{location, 1.0}});
  }

  static SpectralMeasure delta0() { return point(0.0); }

  /// Quantile discretization of an absolutely continuous spectrum: n atoms
  /// at inverse_cdf((j - 1/2)/n), weight 1/n each.
  static SpectralMeasure from_quantiles(
      const std::function<double(double)>& inverse_cdf, int n) {
    if (n < 1) throw std::invalid_argument("from_quantiles: n >= 1");
    std::vector<SpectralAtom> atoms;
    atoms.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
      atoms.push_back({inverse_cdf((j + 0.5) / n), 1.0 / n});
    return SpectralMeasure(std::move(atoms));
  }

  const std::vector<SpectralAtom>& atoms() const { return atoms_; }
  double zero_mass() const { return zero_mass_; }

  /// beta of the declared decomposition H = (1-beta) delta_0 + beta H_1.
  double beta() const { return 1.0 - zero_mass_; }

  /// True when no atom carries mass at a strictly positive location, i.e.
  /// H = delta_0. Representable, but solvers reject it.
  bool degenerate() const {
    for (const auto& a : atoms_)
      if (a.location > 0.0 && a.weight > 0.0) return false;
    return true;
  }

  double first_moment() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.location * a.weight;
    return m;
  }

  double max_location() const {
    double m = 0.0;
    for (const auto& a : atoms_) m = std::max(m, a.location);
    return m;
  }

  /// Plain text format: optional `zero_mass <v>` header line, then one
  /// `location weight` pair per line.
  static SpectralMeasure parse(std::istream& in) {
    std::vector<SpectralAtom> atoms;
    double zero_mass = 0.0;
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string first;
      if (!(ls >> first)) continue;  // blank line
      if (first == "zero_mass") {
        if (!(ls >> zero_mass))
          throw std::invalid_argument("measure parse: bad zero_mass line");
        continue;
      }
      double location, weight;
      std::istringstream pair(line);
      if (!(pair >> location >> weight))
        throw std::invalid_argument(
            detail::msg("measure parse: bad atom line '", line, "'"));
      atoms.push_back({location, weight});
    }
    return SpectralMeasure(std::move(atoms), zero_mass);
  }

  void serialize(std::ostream& out) const {
    out.precision(17);
    if (zero_mass_ != 0.0) out << "zero_mass " << zero_mass_ << "\n";
    for (const auto& a : atoms_) out << a.location << " " << a.weight << "\n";
  }

 private:
  void validate() const {
    if (zero_mass_ < 0.0 || zero_mass_ >= 1.0)
      throw std::invalid_argument("SpectralMeasure: zero_mass must be in [0,1)");
    double total = zero_mass_;
    for (const auto& a : atoms_) {
      if (!(a.location >= 0.0))
        throw std::invalid_argument("SpectralMeasure: atom location < 0");
      if (!(a.weight > 0.0))
        throw std::invalid_argument("SpectralMeasure: atom weight <= 0");
      total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument(
          detail::msg("SpectralMeasure: masses sum to ", total, ", not 1"));
  }

  std::vector<SpectralAtom> atoms_;
  double zero_mass_;
};

/// A discrete probability measure on one of the two canonical axes:
/// coordinates t_j (any sign) mean atoms at i*t_j for the skew axis and at
/// t_j for the hermitian axis.
struct DiscreteAxisMeasure {
  Kernel axis = Kernel::skew;
  std::vector<double> coords;
  std::vector<double> weights;
};

/// Stieltjes transform of a discrete axis measure:
///   skew:      sum_j w_j / (i t_j - z)
///   hermitian: sum_j w_j / (t_j - z)
/// z must be strictly off the support axis.
inline Complex stieltjes_eval(const DiscreteAxisMeasure& mu, Complex z) {
  if (mu.coords.size() != mu.weights.size())
    throw std::invalid_argument("stieltjes_eval: coords/weights mismatch");
  bool on_axis =
      mu.axis == Kernel::skew ? (z.real() == 0.0) : (z.imag() == 0.0);
  if (on_axis)
    throw std::domain_error("stieltjes_eval: z lies on the support axis");
  const Complex i(0.0, 1.0);
  Complex s(0.0, 0.0);
  for (std::size_t j = 0; j < mu.coords.size(); ++j) {
    Complex pole = mu.axis == Kernel::skew ? i * mu.coords[j]
                                           : Complex(mu.coords[j], 0.0);
    s += mu.weights[j] / (pole - z);
  }
  return s;
}

/// Default epsilon schedule for boundary-limit extrapolation. Geometric with
/// ratio 1/2; the boundary values behave like limit + O(eps), so Neville
/// extrapolation removes the leading orders.
inline std::vector<double> default_eps_schedule() {
  return {1e-2, 5e-3, 2.5e-3, 1.25e-3};
}

/// Density of the measure behind a Stieltjes transform at axis coordinate x:
///   skew:      (1/pi) lim_{eps->0} Re s(-eps + i x)
///   hermitian: (1/pi) lim_{eps->0} Im s(x + i eps)
/// The limit is estimated by polynomial extrapolation over eps_schedule; the
/// result carries the extrapolation error estimate and a convergence flag.
inline Extrapolated invert_density(
    const std::function<Complex(Complex)>& s_fn, double x,
    std::span<const double> eps_schedule, Kernel axis = Kernel::skew,
    double flag_tol = 1e-3) {
  if (eps_schedule.size() < 2)
    throw std::invalid_argument("invert_density: need >= 2 epsilons");
  std::vector<double> vals(eps_schedule.size());
  for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
    double eps = eps_schedule[k];
    Complex s = axis == Kernel::skew ? s_fn(Complex(-eps, x))
                                     : s_fn(Complex(x, eps));
    vals[k] = (axis == Kernel::skew ? s.real() : s.imag()) / std::numbers::pi;
  }
  return extrapolate_to_zero(eps_schedule, vals, flag_tol);
}

/// Point mass of the measure behind a Stieltjes transform at coordinate x:
///   skew:      lim eps * s(-eps + i x)
///   hermitian: lim eps * Im s(x + i eps)
/// Values below -1e-8 are flagged as numerical failures.
inline Extrapolated invert_point_mass(
    const std::function<Complex(Complex)>& s_fn, double x,
    std::span<const double> eps_schedule, Kernel axis = Kernel::skew,
    double flag_tol = 1e-3) {
  if (eps_schedule.size() < 2)
    throw std::invalid_argument("invert_point_mass: need >= 2 epsilons");
  std::vector<double> vals(eps_schedule.size());
  for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
    double eps = eps_schedule[k];
    Complex s = axis == Kernel::skew ? s_fn(Complex(-eps, x))
                                     : s_fn(Complex(x, eps));
    vals[k] = eps * (axis == Kernel::skew ? s.real() : s.imag());
  }
  Extrapolated out = extrapolate_to_zero(eps_schedule, vals, flag_tol);
  if (out.value < -1e-8) out.converged = false;
  return out;
}

/// Measure of [a, b] on the axis: (1/pi) lim_eps integral_a^b of the
/// boundary real part, adaptive quadrature per epsilon then extrapolation.
/// Clamped to [0, 1]; quadrature/extrapolation trouble is flagged.
inline Extrapolated cdf_interval(const std::function<Complex(Complex)>& s_fn,
                                 double a, double b,
                                 std::span<const double> eps_schedule,
                                 Kernel axis = Kernel::skew,
                                 double quad_tol = 1e-9,
                                 double flag_tol = 1e-3) {
  if (!(a <= b)) throw std::invalid_argument("cdf_interval: need a <= b");
  if (a == b) return {0.0, 0.0, true};
  std::vector<double> vals(eps_schedule.size());
  for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
    double eps = eps_schedule[k];
    auto integrand = [&](double x) {
      Complex s = axis == Kernel::skew ? s_fn(Complex(-eps, x))
                                       : s_fn(Complex(x, eps));
      return axis == Kernel::skew ? s.real() : s.imag();
    };
    vals[k] = integrate_adaptive(integrand, a, b, quad_tol) / std::numbers::pi;
  }
  Extrapolated out = extrapolate_to_zero(eps_schedule, vals, flag_tol);
  out.value = std::clamp(out.value, 0.0, 1.0);
  return out;
}

/// Right-continuous step distribution function: sorted jump locations with
/// nondecreasing cumulative values ending at 1.
class StepCdf {
 public:
  StepCdf(std::vector<double> jump_xs, std::vector<double> cumulative)
      : xs_(std::move(jump_xs)), cum_(std::move(cumulative)) {
    if (xs_.size() != cum_.size() || xs_.empty())
      throw std::invalid_argument("StepCdf: empty or mismatched arrays");
    double prev = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      if (i > 0 && !(xs_[i] > xs_[i - 1]))
        throw std::invalid_argument("StepCdf: jump locations must increase");
      if (cum_[i] < prev - 1e-15)
        throw std::invalid_argument("StepCdf: cumulative values decrease");
      prev = cum_[i];
    }
    if (std::abs(cum_.back() - 1.0) > 1e-9)
      throw std::invalid_argument("StepCdf: final cumulative value must be 1");
    cum_.back() = 1.0;
  }

  /// Empirical CDF of sorted coordinates; duplicate values merge into one
  /// jump of accumulated mass.
  static StepCdf from_sorted_coords(std::span<const double> coords) {
    if (coords.empty()) throw std::invalid_argument("StepCdf: empty sample");
    std::vector<double> xs, cum;
    const double n = static_cast<double>(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (i > 0 && coords[i] < coords[i - 1])
        throw std::invalid_argument("StepCdf: coordinates must be sorted");
      if (!xs.empty() && coords[i] == xs.back())
        cum.back() = (static_cast<double>(i) + 1.0) / n;
      else {
        xs.push_back(coords[i]);
        cum.push_back((static_cast<double>(i) + 1.0) / n);
      }
    }
    return StepCdf(std::move(xs), std::move(cum));
  }

  double value(double x) const {
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    if (it == xs_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - xs_.begin()) - 1];
  }

  double left_value(double x) const {
    auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
    if (it == xs_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - xs_.begin()) - 1];
  }

  const std::vector<double>& jumps() const { return xs_; }
  const std::vector<double>& cumulative() const { return cum_; }

 private:
  std::vector<double> xs_;
  std::vector<double> cum_;
};

/// A limiting spectral distribution over one axis: density samples on a
/// strictly increasing grid, a point mass at zero, and the support
/// endpoints of the absolutely continuous part.
struct LsdCurve {
  double c = 0.0;
  Kernel kernel = Kernel::skew;
  std::vector<double> grid;
  std::vector<double> density;
  std::vector<double> cdf;  // includes the atom jump at 0
  double point_mass_zero = 0.0;
  double support_lower = 0.0;  // L
  double support_upper = 0.0;  // U

  static LsdCurve build(double c, Kernel kernel, std::vector<double> grid,
                        std::vector<double> density, double point_mass_zero,
                        double support_lower, double support_upper) {
    LsdCurve out;
    out.c = c;
    out.kernel = kernel;
    out.grid = std::move(grid);
    out.density = std::move(density);
    out.point_mass_zero = point_mass_zero;
    out.support_lower = support_lower;
    out.support_upper = support_upper;
    std::vector<double> ac = cumulative_trapezoid(out.grid, out.density);
    out.cdf.resize(ac.size());
    for (std::size_t i = 0; i < ac.size(); ++i)
      out.cdf[i] = ac[i] + (out.grid[i] >= 0.0 ? point_mass_zero : 0.0);
    return out;
  }

  /// Linear interpolation of the density; zero outside the grid.
  double density_at(double x) const {
    if (grid.empty() || x < grid.front() || x > grid.back()) return 0.0;
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    if (it == grid.begin()) return density.front();
    if (it == grid.end()) return density.back();
    std::size_t i = static_cast<std::size_t>(it - grid.begin());
    double t = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return (1.0 - t) * density[i - 1] + t * density[i];
  }

  /// Right-continuous CDF: piecewise-linear accumulation of the density
  /// plus the atom jump at 0.
  double cdf_at(double x) const {
    return ac_cdf_at(x) + (x >= 0.0 ? point_mass_zero : 0.0);
  }

  double cdf_left_at(double x) const {
    return ac_cdf_at(x) + (x > 0.0 ? point_mass_zero : 0.0);
  }

  double total_mass() const {
    return trapezoid(grid, density) + point_mass_zero;
  }

  /// Checks the structural invariants: symmetry on symmetric grids, total
  /// mass within mass_tol of 1, vanishing density outside [L, U].
  void validate(double mass_tol = 1e-4, double sym_tol = 1e-10) const {
    if (grid.size() != density.size() || grid.size() < 2)
      throw std::invalid_argument("LsdCurve: grid/density mismatch");
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (!(grid[i] > grid[i - 1]))
        throw std::invalid_argument("LsdCurve: grid must strictly increase");
    if (point_mass_zero < 0.0 || point_mass_zero >= 1.0)
      throw std::invalid_argument("LsdCurve: point mass outside [0,1)");
    const std::size_t n = grid.size();
    bool symmetric_grid = true;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(grid[i] + grid[n - 1 - i]) > 1e-12 * (1.0 + std::abs(grid[i])))
        symmetric_grid = false;
    if (symmetric_grid)
      for (std::size_t i = 0; i < n; ++i)
        if (std::abs(density[i] - density[n - 1 - i]) > sym_tol)
          throw std::invalid_argument(detail::msg(
              "LsdCurve: density asymmetric at |x|=", std::abs(grid[i])));
    double mass = trapezoid(grid, density) + point_mass_zero;
    if (std::abs(mass - 1.0) > mass_tol)
      throw std::invalid_argument(
          detail::msg("LsdCurve: total mass ", mass, " != 1"));
    for (std::size_t i = 0; i < n; ++i) {
      if (density[i] < 0.0)
        throw std::invalid_argument("LsdCurve: negative density");
      double ax = std::abs(grid[i]);
      if ((ax > support_upper * (1.0 + 1e-9) + 1e-12) && density[i] > 1e-8)
        throw std::invalid_argument(detail::msg(
            "LsdCurve: density ", density[i], " outside support at x=", grid[i]));
    }
  }

 private:
  double ac_cdf_at(double x) const {
    if (grid.empty() || x <= grid.front()) return 0.0;
    // cdf[] already includes the atom for grid >= 0; subtract on the fly.
    auto node = [&](std::size_t i) {
      return cdf[i] - (grid[i] >= 0.0 ? point_mass_zero : 0.0);
    };
    if (x >= grid.back()) return node(grid.size() - 1);
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid.begin());
    double t = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return (1.0 - t) * node(i - 1) + t * node(i);
  }
};

struct KsLevy {
  double ks = 0.0;
  double levy = 0.0;
};

namespace detail {

// Uniform view of a CDF for metric computation: knot locations where the
// function can jump or kink, plus right-continuous value and left limit.
struct CdfView {
  std::vector<double> knots;
  std::function<double(double)> value;
  std::function<double(double)> left;
};

inline CdfView view_of(const StepCdf& f) {
  return {f.jumps(), [&f](double x) { return f.value(x); },
          [&f](double x) { return f.left_value(x); }};
}

inline CdfView view_of(const LsdCurve& f) {
  std::vector<double> knots = f.grid;
  knots.push_back(0.0);  // atom location
  std::sort(knots.begin(), knots.end());
  return {std::move(knots), [&f](double x) { return f.cdf_at(x); },
          [&f](double x) { return f.cdf_left_at(x); }};
}

inline double ks_of(const CdfView& f, const CdfView& g) {
  double ks = 0.0;
  auto probe = [&](double x) {
    ks = std::max(ks, std::abs(f.value(x) - g.value(x)));
    ks = std::max(ks, std::abs(f.left(x) - g.left(x)));
  };
  for (double x : f.knots) probe(x);
  for (double x : g.knots) probe(x);
  return ks;
}

// Checks sup_x [F(x - delta) - G(x)] <= delta and
//        sup_x [G(x) - F(x + delta)] <= delta.
// Both sups are attained at (one-sided limits of) knots of G or shifted
// knots of F, since the difference is piecewise monotone between them.
inline bool levy_ok(const CdfView& f, const CdfView& g, double delta) {
  const double fuzz = 1e-14;
  auto check_upper = [&](double x) {  // F(x - delta) - G(x) <= delta
    if (f.value(x - delta) - g.value(x) > delta + fuzz) return false;
    if (f.left(x - delta) - g.left(x) > delta + fuzz) return false;
    return true;
  };
  auto check_lower = [&](double x) {  // G(x) - F(x + delta) <= delta
    if (g.value(x) - f.value(x + delta) > delta + fuzz) return false;
    if (g.left(x) - f.left(x + delta) > delta + fuzz) return false;
    return true;
  };
  for (double x : g.knots)
    if (!check_upper(x) || !check_lower(x)) return false;
  for (double x : f.knots) {
    if (!check_upper(x + delta)) return false;
    if (!check_lower(x - delta)) return false;
  }
  return true;
}

inline KsLevy ks_and_levy_views(const CdfView& f, const CdfView& g) {
  KsLevy out;
  out.ks = ks_of(f, g);
  if (out.ks == 0.0) return out;
  // The Levy distance never exceeds the uniform distance, so [0, ks]
  // brackets it.
  if (levy_ok(f, g, 0.0)) {
    out.levy = 0.0;
    return out;
  }
  out.levy = bisect_predicate(
      [&](double d) { return levy_ok(f, g, d); }, 0.0, out.ks, 60);
  return out;
}

}  // namespace detail

/// Uniform (Kolmogorov-Smirnov) and Levy distances between two step CDFs.
inline KsLevy ks_and_levy(const StepCdf& f, const StepCdf& g) {
  return detail::ks_and_levy_views(detail::view_of(f), detail::view_of(g));
}

/// Same metrics between a step CDF and the CDF of a density curve.
inline KsLevy ks_and_levy(const StepCdf& f, const LsdCurve& g) {
  return detail::ks_and_levy_views(detail::view_of(f), detail::view_of(g));
}

}  // namespace rmc
