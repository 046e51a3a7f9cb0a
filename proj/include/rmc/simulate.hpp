#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "rmc/errors.hpp"
#include "rmc/kernels.hpp"
#include "rmc/linalg.hpp"
#include "rmc/measures.hpp"

namespace rmc {

enum class EntryDist {
  gaussian,    // N(0, 1)
  uniform,     // U(-sqrt(3), sqrt(3)), unit variance
  rademacher,  // +-1 with equal probability
  mixed,       // a seeded random half of the rows gaussian, the rest uniform
};

inline const char* entry_dist_name(EntryDist d) {
  switch (d) {
    case EntryDist::gaussian: return "gaussian";
    case EntryDist::uniform: return "uniform";
    case EntryDist::rademacher: return "rademacher";
    case EntryDist::mixed: return "mixed";
  }
  return "?";
}

inline EntryDist parse_entry_dist(const std::string& s) {
  if (s == "gaussian") return EntryDist::gaussian;
  if (s == "uniform") return EntryDist::uniform;
  if (s == "rademacher") return EntryDist::rademacher;
  if (s == "mixed") return EntryDist::mixed;
  throw std::invalid_argument("unknown entry distribution: " + s);
}

/// Population covariance: the identity, or a diagonal matrix whose spectrum
/// tracks a SpectralMeasure (multiplicities proportional to weights,
/// largest-remainder rounding; the zero_mass share becomes zero rows).
struct SigmaSpec {
  bool is_identity = true;
  SpectralMeasure measure = SpectralMeasure::point(1.0);

  static SigmaSpec identity() { return {}; }
  static SigmaSpec from_measure(SpectralMeasure m) {
    SigmaSpec s;
    s.is_identity = false;
    s.measure = std::move(m);
    return s;
  }
};

struct EnsembleConfig {
  int p = 0;
  int n = 0;
  EntryDist entry_dist = EntryDist::gaussian;
  SigmaSpec sigma = SigmaSpec::identity();
  std::uint64_t seed = 0;
  Kernel kernel = Kernel::skew;  // minus -> S^-, plus -> S^+
  std::uint64_t replicate = 0;   // derives an independent stream per replicate

  void validate() const {
    if (p < 2 || n < 1)
      throw std::invalid_argument("EnsembleConfig: need p >= 2, n >= 1");
  }

  double c_n() const { return static_cast<double>(p) / n; }
};

namespace rng {

// Counter-based generator: every variate is a pure function of
// (seed, stream, counter), so matrices are bit-reproducible regardless of
// traversal or threading. Mixing is the SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t bits(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t counter) {
  return mix64(seed ^ mix64(stream ^ mix64(counter)));
}

inline double u01(std::uint64_t b) {  // uniform in (0, 1]
  return (static_cast<double>(b >> 11) + 1.0) * 0x1.0p-53;
}

inline double gaussian(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t counter) {
  double u1 = u01(bits(seed, stream, 2 * counter));
  double u2 = u01(bits(seed, stream, 2 * counter + 1));
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

inline double uniform_unit_var(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t counter) {
  double u = u01(bits(seed, stream, 2 * counter));
  return (2.0 * u - 1.0) * std::numbers::sqrt3;
}

inline double rademacher(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t counter) {
  return (bits(seed, stream, 2 * counter) & 1ull) ? 1.0 : -1.0;
}

}  // namespace rng

struct EnsembleDraw {
  RealMatrix z1, z2;                 // p x n, i.i.d. unit-variance entries
  std::vector<double> sigma_sqrt;    // diagonal of Sigma^{1/2}
  std::vector<int> gaussian_rows;    // row assignment of the mixed ensemble
};

namespace detail {

inline std::vector<double> sigma_sqrt_diagonal(const SigmaSpec& sigma, int p) {
  std::vector<double> diag(static_cast<std::size_t>(p), 1.0);
  if (sigma.is_identity) return diag;
  // Largest-remainder apportionment of p slots across the atoms and the
  // zero-mass share, so the ESD of Sigma tracks the measure.
  struct Slot {
    double location;
    double target;
    int count;
    double remainder;
  };
  std::vector<Slot> slots;
  slots.push_back({0.0, sigma.measure.zero_mass() * p, 0, 0.0});
  for (const auto& a : sigma.measure.atoms())
    slots.push_back({a.location, a.weight * p, 0, 0.0});
  int assigned = 0;
  for (auto& s : slots) {
    s.count = static_cast<int>(std::floor(s.target));
    s.remainder = s.target - s.count;
    assigned += s.count;
  }
  std::vector<std::size_t> order(slots.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return slots[a].remainder > slots[b].remainder;
  });
  for (std::size_t i = 0; assigned < p; ++i, ++assigned)
    slots[order[i % order.size()]].count += 1;
  std::size_t row = 0;
  for (const auto& s : slots)
    for (int k = 0; k < s.count && row < diag.size(); ++k, ++row)
      diag[row] = std::sqrt(s.location);
  return diag;
}

inline std::uint64_t replicate_seed(const EnsembleConfig& cfg) {
  return rng::mix64(cfg.seed ^ rng::mix64(cfg.replicate));
}

}  // namespace detail

/// Gaussian row assignment of the mixed ensemble: the first ceil(p/2)
/// entries of a seeded Fisher-Yates shuffle of the row indices, returned
/// sorted. Pure function of the config, so the assignment can be recorded
/// and reproduced.
inline std::vector<int> sample_gaussian_rows(const EnsembleConfig& cfg) {
  if (cfg.entry_dist != EntryDist::mixed) return {};
  const std::uint64_t seed = detail::replicate_seed(cfg);
  std::vector<int> rows(static_cast<std::size_t>(cfg.p));
  std::iota(rows.begin(), rows.end(), 0);
  for (int i = cfg.p - 1; i > 0; --i) {
    std::uint64_t b = rng::bits(seed, 0xA55Aull, static_cast<std::uint64_t>(i));
    int j = static_cast<int>(b % static_cast<std::uint64_t>(i + 1));
    std::swap(rows[static_cast<std::size_t>(i)],
              rows[static_cast<std::size_t>(j)]);
  }
  std::vector<int> gaussian(rows.begin(), rows.begin() + (cfg.p + 1) / 2);
  std::sort(gaussian.begin(), gaussian.end());
  return gaussian;
}

/// Draws the two independent entry matrices and the diagonal Sigma^{1/2}.
/// Deterministic given (seed, replicate): every entry is a counter-based
/// function of its coordinates. The mixed ensemble assigns ceil(p/2) rows to
/// the gaussian law under a seeded shuffle and reports the assignment.
inline EnsembleDraw sample_ensemble(const EnsembleConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = detail::replicate_seed(cfg);
  EnsembleDraw draw;
  draw.sigma_sqrt = detail::sigma_sqrt_diagonal(cfg.sigma, cfg.p);

  std::vector<char> is_gaussian_row(static_cast<std::size_t>(cfg.p), 0);
  if (cfg.entry_dist == EntryDist::mixed) {
    draw.gaussian_rows = sample_gaussian_rows(cfg);
    for (int r : draw.gaussian_rows)
      is_gaussian_row[static_cast<std::size_t>(r)] = 1;
  }

  auto fill = [&](RealMatrix& z, std::uint64_t stream) {
    z = RealMatrix(cfg.p, cfg.n);
    for (int i = 0; i < cfg.p; ++i) {
      double* zrow = z.row(i);
      for (int j = 0; j < cfg.n; ++j) {
        std::uint64_t ctr =
            static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(cfg.n) +
            static_cast<std::uint64_t>(j);
        switch (cfg.entry_dist) {
          case EntryDist::gaussian:
            zrow[j] = rng::gaussian(seed, stream, ctr);
            break;
          case EntryDist::uniform:
            zrow[j] = rng::uniform_unit_var(seed, stream, ctr);
            break;
          case EntryDist::rademacher:
            zrow[j] = rng::rademacher(seed, stream, ctr);
            break;
          case EntryDist::mixed:
            zrow[j] = is_gaussian_row[static_cast<std::size_t>(i)]
                          ? rng::gaussian(seed, stream, ctr)
                          : rng::uniform_unit_var(seed, stream, ctr);
            break;
        }
      }
    }
  };
  fill(draw.z1, 1);
  fill(draw.z2, 2);
  return draw;
}

/// S = n^{-1} Sigma^{1/2} (Z1 Z2^* -+ Z2 Z1^*) Sigma^{1/2}.
/// The minus (skew) case returns A - A^T and the plus case A + A^T for
/// A = n^{-1} Sigma^{1/2} Z1 Z2^* Sigma^{1/2}, so the structural symmetry
/// holds exactly in floating point.
inline RealMatrix assemble(const EnsembleConfig& cfg, const RealMatrix& z1,
                           const RealMatrix& z2,
                           const std::vector<double>& sigma_sqrt,
                           int threads = 1) {
  if (z1.rows() != z2.rows() || z1.cols() != z2.cols() ||
      static_cast<std::size_t>(z1.rows()) != sigma_sqrt.size())
    throw std::invalid_argument("assemble: shape mismatch");
  const int p = z1.rows(), n = z1.cols();
  RealMatrix x1(p, n), x2(p, n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < p; ++i) {
    double s = sigma_sqrt[static_cast<std::size_t>(i)] * inv_sqrt_n;
    const double *r1 = z1.row(i), *r2 = z2.row(i);
    double *o1 = x1.row(i), *o2 = x2.row(i);
    for (int j = 0; j < n; ++j) {
      o1[j] = s * r1[j];
      o2[j] = s * r2[j];
    }
  }
  RealMatrix a = matmul_nt(x1, x2, threads);
  RealMatrix s(p, p);
  const double sign = cfg.kernel == Kernel::skew ? -1.0 : 1.0;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) s(i, j) = a(i, j) + sign * a(j, i);
  return s;
}

/// Sorted eigenvalue coordinates of one simulated matrix: imaginary parts
/// for the skew case, eigenvalues for the hermitian case.
struct EsdSample {
  std::vector<double> coords;  // ascending, length p
  int p = 0;
  int n = 0;
  double c_n = 0.0;
  Kernel kernel = Kernel::skew;
  std::string fingerprint;
};

enum class EigenPath {
  canonical,  // Hermitian solve on -iS (skew) or S itself (plus)
  fast,       // skew only: symmetric solve of -S^2, signs by sorted pairing
  automatic,  // fast for large skew matrices, canonical otherwise
};

namespace detail {

inline void require_structure(const RealMatrix& s, Kernel kernel) {
  const double sign = kernel == Kernel::skew ? -1.0 : 1.0;
  for (int i = 0; i < s.rows(); ++i)
    for (int j = 0; j <= i; ++j)
      if (s(i, j) != sign * s(j, i))
        throw std::invalid_argument(
            kernel == Kernel::skew
                ? "eigenvalues: matrix is not exactly skew-symmetric"
                : "eigenvalues: matrix is not exactly symmetric");
}

inline std::vector<double> skew_coords_fast(const RealMatrix& s, int threads,
                                            const std::string& label) {
  // -S^2 = S S^T is symmetric PSD with doubled eigenvalues mu = lambda^2;
  // signs are restored by pairing adjacent values of the sorted sqrt list.
  RealMatrix ss = matmul_nt(s, s, threads);
  EigenOptions opt;
  opt.threads = threads;
  opt.label = label;
  SymmetricEigen eig = eigen_symmetric(std::move(ss), opt);
  std::vector<double> mag;
  mag.reserve(eig.values.size());
  for (double v : eig.values) mag.push_back(std::sqrt(std::max(0.0, v)));
  std::sort(mag.begin(), mag.end(), std::greater<>());
  std::vector<double> coords;
  coords.reserve(mag.size());
  std::size_t i = 0;
  for (; i + 1 < mag.size(); i += 2) {
    double m = 0.5 * (mag[i] + mag[i + 1]);
    coords.push_back(m);
    coords.push_back(-m);
  }
  if (i < mag.size()) coords.push_back(0.0);  // odd dimension leftover
  std::sort(coords.begin(), coords.end());
  return coords;
}

}  // namespace detail

inline EsdSample eigenvalues(const RealMatrix& s, Kernel kernel,
                             EigenPath path = EigenPath::automatic,
                             int threads = 1) {
  detail::require_structure(s, kernel);
  const std::string fp = matrix_fingerprint(s);
  if (path == EigenPath::automatic)
    path = (kernel == Kernel::skew && s.rows() >= 512) ? EigenPath::fast
                                                       : EigenPath::canonical;
  EsdSample out;
  out.p = s.rows();
  out.kernel = kernel;
  out.fingerprint = fp;

  if (kernel == Kernel::hermitian) {
    EigenOptions opt;
    opt.threads = threads;
    opt.label = fp;
    out.coords = eigen_symmetric(s, opt).values;
    return out;
  }
  if (path == EigenPath::fast) {
    out.coords = detail::skew_coords_fast(s, threads, fp);
    return out;
  }
  // Canonical path: -iS is Hermitian with the coordinate spectrum.
  ComplexMatrix h(s.rows(), s.cols());
  for (int i = 0; i < s.rows(); ++i)
    for (int j = 0; j < s.cols(); ++j)
      h(i, j) = Complex(0.0, -1.0) * s(i, j);
  EigenOptions opt;
  opt.threads = threads;
  opt.label = fp;
  out.coords = eigen_hermitian(std::move(h), opt).values;
  return out;
}

/// Full pipeline for one replicate: draw, assemble, eigensolve.
inline EsdSample simulate_esd(const EnsembleConfig& cfg,
                              EigenPath path = EigenPath::automatic,
                              int threads = 1) {
  EnsembleDraw draw = sample_ensemble(cfg);
  RealMatrix s = assemble(cfg, draw.z1, draw.z2, draw.sigma_sqrt, threads);
  EsdSample sample = eigenvalues(s, cfg.kernel, path, threads);
  sample.n = cfg.n;
  sample.c_n = cfg.c_n();
  return sample;
}

/// Empirical CDF of a sample; jumps of 1/p, duplicates merged. The input
/// order does not matter, so a permuted sample yields the identical CDF.
inline StepCdf esd_cdf(const EsdSample& sample) {
  if (std::is_sorted(sample.coords.begin(), sample.coords.end()))
    return StepCdf::from_sorted_coords(sample.coords);
  std::vector<double> sorted = sample.coords;
  std::sort(sorted.begin(), sorted.end());
  return StepCdf::from_sorted_coords(sorted);
}

}  // namespace rmc
