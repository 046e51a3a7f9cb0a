#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rmc/errors.hpp"
#include "rmc/measures.hpp"
#include "rmc/simulate.hpp"

namespace rmc {

/// Quantitative distance between one empirical spectrum and a theoretical
/// curve. All metrics are nonnegative; ks <= 1 and levy <= ks always.
struct ComparisonReport {
  double ks = 0.0;
  double levy = 0.0;
  double l1_hist = 0.0;
  double point_mass_est = 0.0;
  double support_violation_frac = 0.0;
  int p = 0;
  int n = 0;
  int replicates = 1;
};

inline double default_atom_window(const LsdCurve& curve) {
  return 1e-2 * curve.support_upper;
}

/// L1 distance between the binned sample density and the curve density over
/// bins covering [-U, U], plus the sample and curve mass falling outside the
/// binned region (so disjoint supports approach the total-variation ceiling
/// of 2). When the curve carries an atom, a +-atom_window strip around zero
/// is excluded from both sides.
inline double histogram_l1(const EsdSample& sample, const LsdCurve& curve,
                           int bins, double atom_window = -1.0) {
  if (bins < 10) throw std::invalid_argument("histogram_l1: bins >= 10");
  if (sample.kernel != curve.kernel)
    throw std::invalid_argument("histogram_l1: kernel tags differ");
  if (atom_window < 0.0) atom_window = default_atom_window(curve);
  const bool has_atom = curve.point_mass_zero > 0.0;
  const double lo = -curve.support_upper, hi = curve.support_upper;
  const double dx = (hi - lo) / bins;
  const double n = static_cast<double>(sample.coords.size());

  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  double outside = 0.0;
  for (double x : sample.coords) {
    if (has_atom && std::abs(x) <= atom_window) continue;  // atom cluster
    if (x < lo || x >= hi) {
      outside += 1.0;
      continue;
    }
    int b = static_cast<int>((x - lo) / dx);
    b = std::clamp(b, 0, bins - 1);
    counts[static_cast<std::size_t>(b)] += 1.0;
  }

  double l1 = outside / n;
  for (int b = 0; b < bins; ++b) {
    double center = lo + (b + 0.5) * dx;
    if (has_atom && std::abs(center) <= atom_window) continue;
    double hist_density = counts[static_cast<std::size_t>(b)] / (n * dx);
    l1 += std::abs(hist_density - curve.density_at(center)) * dx;
  }
  return l1;
}

/// Compares one sample against a curve: uniform and Levy CDF distances
/// (the curve atom enters as a jump at zero), the histogram L1, the
/// fraction of coordinates inside the atom window, and the fraction
/// escaping the support by more than the window.
inline ComparisonReport compare(const EsdSample& sample, const LsdCurve& curve,
                                int bins = 100, double atom_window = -1.0) {
  if (bins < 2) throw std::invalid_argument("compare: bins >= 2");
  if (sample.kernel != curve.kernel)
    throw std::invalid_argument("compare: kernel tags differ");
  if (atom_window < 0.0) atom_window = default_atom_window(curve);

  ComparisonReport rep;
  rep.p = sample.p;
  rep.n = sample.n;
  KsLevy m = ks_and_levy(esd_cdf(sample), curve);
  rep.ks = m.ks;
  rep.levy = m.levy;
  rep.l1_hist = histogram_l1(sample, curve, std::max(bins, 10), atom_window);

  double in_window = 0.0, violations = 0.0;
  const double bound = curve.support_upper + atom_window;
  for (double x : sample.coords) {
    if (std::abs(x) <= atom_window) in_window += 1.0;
    if (std::abs(x) > bound) violations += 1.0;
  }
  const double n = static_cast<double>(sample.coords.size());
  rep.point_mass_est = in_window / n;
  rep.support_violation_frac = violations / n;
  return rep;
}

}  // namespace rmc
