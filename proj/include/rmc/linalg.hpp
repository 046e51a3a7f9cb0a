#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "rmc/errors.hpp"

namespace rmc {

/// Dense row-major matrix. Just enough surface for the ensemble and
/// eigensolver work in this library.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
              fill) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  T& operator()(int i, int j) {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }
  const T& operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }

  T* row(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }
  const T* row(int i) const {
    return data_.data() + static_cast<std::size_t>(i) * cols_;
  }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<std::complex<double>>;

namespace detail {

inline void run_row_blocks(int n, int threads,
                           const std::function<void(int, int)>& body) {
  if (threads < 2 || n < 64) {
    body(0, n);
    return;
  }
  int nt = std::min(threads, n);
  std::vector<std::thread> pool;
  int chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    int lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([=] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// C = A * B^T. Tiled over rows so both operands stream contiguously.
inline RealMatrix matmul_nt(const RealMatrix& a, const RealMatrix& b,
                            int threads = 1) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("matmul_nt: inner dimensions differ");
  const int m = a.rows(), n = b.rows(), k = a.cols();
  RealMatrix c(m, n);
  const int tile = 48;
  detail::run_row_blocks(m, threads, [&](int ilo, int ihi) {
    for (int jb = 0; jb < n; jb += tile) {
      int jhi = std::min(n, jb + tile);
      for (int i = ilo; i < ihi; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (int j = jb; j < jhi; ++j) {
          const double* bj = b.row(j);
          double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
          int t = 0;
          for (; t + 4 <= k; t += 4) {
            s0 += ai[t] * bj[t];
            s1 += ai[t + 1] * bj[t + 1];
            s2 += ai[t + 2] * bj[t + 2];
            s3 += ai[t + 3] * bj[t + 3];
          }
          for (; t < k; ++t) s0 += ai[t] * bj[t];
          ci[j] = (s0 + s1) + (s2 + s3);
        }
      }
    }
  });
  return c;
}

/// Short stable hash of the raw matrix bytes, for error messages and
/// reproducibility records.
template <typename T>
std::string matrix_fingerprint(const Matrix<T>& m) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&h](const void* p, std::size_t bytes) {
    const unsigned char* q = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= q[i];
      h *= 1099511628211ull;
    }
  };
  int dims[2] = {m.rows(), m.cols()};
  mix(dims, sizeof(dims));
  mix(m.data().data(), m.data().size() * sizeof(T));
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

namespace detail {

// Implicit-shift QL on a symmetric tridiagonal matrix.
// d[0..n-1] diagonal, e[0..n-1] with e[i] coupling d[i] and d[i+1]
// (e[n-1] unused). When z is non-null its columns are rotated along, so
// passing the reduction transform yields eigenvectors of the original
// matrix. Eigenvalues land in d, unsorted.
template <typename VecT>
void tqli(std::vector<double>& d, std::vector<double>& e, Matrix<VecT>* z,
          const std::string& label) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return;
  e[static_cast<std::size_t>(n - 1)] = 0.0;
  // Off-diagonals at the roundoff floor of the whole matrix deflate too;
  // a purely relative test can spin forever on noise-scale trailing blocks
  // left behind by rank-deficient inputs.
  double tnorm = 0.0;
  for (int i = 0; i < n; ++i)
    tnorm = std::max(tnorm, std::abs(d[i]) + std::abs(e[i]) +
                                (i > 0 ? std::abs(e[i - 1]) : 0.0));
  const double floor_tol = std::numeric_limits<double>::epsilon() * tnorm;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd ||
            std::abs(e[m]) <= floor_tol)
          break;
      }
      if (m != l) {
        if (iter++ == 60)
          throw EigensolverFailure(
              msg("tqli: no convergence after 60 sweeps (", label, ")"));
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (z) {
            for (int k = 0; k < z->rows(); ++k) {
              VecT fk = (*z)(k, i + 1);
              (*z)(k, i + 1) = s * (*z)(k, i) + c * fk;
              (*z)(k, i) = c * (*z)(k, i) - s * fk;
            }
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

template <typename T>
void sort_eigen(std::vector<double>& values, Matrix<T>* vectors) {
  const int n = static_cast<int>(values.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return values[a] < values[b]; });
  std::vector<double> vs(values.size());
  for (int j = 0; j < n; ++j) vs[j] = values[order[j]];
  values.swap(vs);
  if (vectors) {
    Matrix<T> perm(vectors->rows(), vectors->cols());
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < vectors->rows(); ++i)
        perm(i, j) = (*vectors)(i, order[j]);
    *vectors = std::move(perm);
  }
}

}  // namespace detail

struct EigenOptions {
  bool want_vectors = false;
  int threads = 1;
  std::string label;  // carried into failure messages (e.g. a fingerprint)
};

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  RealMatrix vectors;          // columns, when requested
};

/// Eigendecomposition of a real symmetric matrix: Householder reduction to
/// tridiagonal form followed by implicit-shift QL.
inline SymmetricEigen eigen_symmetric(RealMatrix a,
                                      const EigenOptions& opt = {}) {
  const int n = a.rows();
  if (n != a.cols()) throw std::invalid_argument("eigen_symmetric: not square");
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  std::vector<double> taus(static_cast<std::size_t>(n), 0.0);
  std::vector<double> p(static_cast<std::size_t>(n), 0.0);

  // Householder vectors are left in the reduced columns of a; taus holds
  // the reflector scales for the optional back-accumulation pass.
  for (int k = 0; k + 2 < n; ++k) {
    const int m = n - k - 1;
    double xnorm2 = 0.0;
    for (int i = k + 1; i < n; ++i) xnorm2 += a(i, k) * a(i, k);
    double xnorm = std::sqrt(xnorm2);
    if (xnorm == 0.0) {
      e[k + 1] = 0.0;
      taus[k] = 0.0;
      continue;
    }
    double x0 = a(k + 1, k);
    double alpha = x0 >= 0.0 ? -xnorm : xnorm;
    a(k + 1, k) = x0 - alpha;  // v overwrites x in place
    double vnorm2 = 2.0 * xnorm * (xnorm + std::abs(x0));
    double tau = 2.0 / vnorm2;
    taus[k] = tau;
    e[k + 1] = alpha;

    // p = tau * A22 * v over the trailing symmetric block.
    detail::run_row_blocks(m, opt.threads, [&](int rlo, int rhi) {
      for (int i = k + 1 + rlo; i < k + 1 + rhi; ++i) {
        double s = 0.0;
        const double* arow = a.row(i);
        for (int j = k + 1; j <= i; ++j) s += arow[j] * a(j, k);
        for (int j = i + 1; j < n; ++j) s += a(j, i) * a(j, k);
        p[i] = tau * s;
      }
    });
    double vp = 0.0;
    for (int i = k + 1; i < n; ++i) vp += a(i, k) * p[i];
    double kk = 0.5 * tau * vp;
    for (int i = k + 1; i < n; ++i) p[i] -= kk * a(i, k);  // p becomes w
    // A22 -= v w^T + w v^T (lower triangle)
    detail::run_row_blocks(m, opt.threads, [&](int rlo, int rhi) {
      for (int i = k + 1 + rlo; i < k + 1 + rhi; ++i) {
        double vi = a(i, k), wi = p[i];
        double* arow = a.row(i);
        for (int j = k + 1; j <= i; ++j)
          arow[j] -= vi * p[j] + wi * a(j, k);
      }
    });
  }
  if (n >= 2) e[n - 1] = a(n - 1, n - 2);
  for (int i = 0; i < n; ++i) d[i] = a(i, i);
  // Shift the coupling convention: e_ql[i] couples d[i], d[i+1].
  std::vector<double> eq(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i + 1 < n; ++i) eq[i] = e[i + 1];

  SymmetricEigen out;
  out.values = std::move(d);
  if (!opt.want_vectors) {
    detail::tqli<double>(out.values, eq, nullptr, opt.label);
    detail::sort_eigen<double>(out.values, nullptr);
    return out;
  }

  RealMatrix q = RealMatrix::identity(n);
  for (int k = n - 3; k >= 0; --k) {
    if (taus[k] == 0.0) continue;
    double tau = taus[k];
    for (int col = k + 1; col < n; ++col) {
      double s = 0.0;
      for (int i = k + 1; i < n; ++i) s += a(i, k) * q(i, col);
      s *= tau;
      for (int i = k + 1; i < n; ++i) q(i, col) -= s * a(i, k);
    }
  }
  detail::tqli<double>(out.values, eq, &q, opt.label);
  out.vectors = std::move(q);
  detail::sort_eigen<double>(out.values, &out.vectors);
  return out;
}

struct HermitianEigen {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // columns, when requested
};

/// Eigendecomposition of a complex Hermitian matrix: complex Householder
/// reduction to a real symmetric tridiagonal (subdiagonal phases absorbed
/// into a diagonal unitary) followed by implicit-shift QL. Real input takes
/// the real reduction path.
inline HermitianEigen eigen_hermitian(ComplexMatrix a,
                                      const EigenOptions& opt = {}) {
  const int n = a.rows();
  if (n != a.cols()) throw std::invalid_argument("eigen_hermitian: not square");

  bool real_input = true;
  for (const auto& v : a.data())
    if (v.imag() != 0.0) {
      real_input = false;
      break;
    }
  if (real_input) {
    RealMatrix ar(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ar(i, j) = a(i, j).real();
    SymmetricEigen se = eigen_symmetric(std::move(ar), opt);
    HermitianEigen out;
    out.values = std::move(se.values);
    if (opt.want_vectors) {
      out.vectors = ComplexMatrix(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.vectors(i, j) = se.vectors(i, j);
    }
    return out;
  }

  using C = std::complex<double>;
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  std::vector<C> esub(static_cast<std::size_t>(n), C(0.0, 0.0));
  std::vector<double> taus(static_cast<std::size_t>(n), 0.0);
  std::vector<C> p(static_cast<std::size_t>(n), C(0.0, 0.0));

  for (int k = 0; k + 2 < n; ++k) {
    const int m = n - k - 1;
    double xnorm2 = 0.0;
    for (int i = k + 1; i < n; ++i) xnorm2 += std::norm(a(i, k));
    double xnorm = std::sqrt(xnorm2);
    if (xnorm == 0.0) {
      esub[k + 1] = C(0.0, 0.0);
      taus[k] = 0.0;
      continue;
    }
    C x0 = a(k + 1, k);
    C phase = std::abs(x0) == 0.0 ? C(1.0, 0.0) : x0 / std::abs(x0);
    C alpha = -phase * xnorm;
    a(k + 1, k) = x0 - alpha;
    double vnorm2 = 2.0 * xnorm * (xnorm + std::abs(x0));
    double tau = 2.0 / vnorm2;
    taus[k] = tau;
    esub[k + 1] = alpha;

    detail::run_row_blocks(m, opt.threads, [&](int rlo, int rhi) {
      for (int i = k + 1 + rlo; i < k + 1 + rhi; ++i) {
        C s(0.0, 0.0);
        for (int j = k + 1; j <= i; ++j) s += a(i, j) * a(j, k);
        for (int j = i + 1; j < n; ++j) s += std::conj(a(j, i)) * a(j, k);
        p[i] = tau * s;
      }
    });
    C vp(0.0, 0.0);
    for (int i = k + 1; i < n; ++i) vp += std::conj(a(i, k)) * p[i];
    C kk = 0.5 * tau * vp;  // vp = tau v* A v is real for Hermitian A
    for (int i = k + 1; i < n; ++i) p[i] -= kk * a(i, k);
    detail::run_row_blocks(m, opt.threads, [&](int rlo, int rhi) {
      for (int i = k + 1 + rlo; i < k + 1 + rhi; ++i) {
        C vi = a(i, k), wi = p[i];
        for (int j = k + 1; j <= i; ++j)
          a(i, j) -= vi * std::conj(p[j]) + wi * std::conj(a(j, k));
      }
    });
  }
  if (n >= 2) esub[n - 1] = a(n - 1, n - 2);
  for (int i = 0; i < n; ++i) d[i] = a(i, i).real();

  // Absorb subdiagonal phases into a diagonal unitary so QL runs in real
  // arithmetic: conj(ph[j+1]) * esub[j+1] * ph[j] = |esub[j+1]|.
  std::vector<C> ph(static_cast<std::size_t>(n), C(1.0, 0.0));
  std::vector<double> eq(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j + 1 < n; ++j) {
    C ej = esub[j + 1];
    double aej = std::abs(ej);
    ph[j + 1] = aej == 0.0 ? ph[j] : ph[j] * (ej / aej);
    eq[j] = aej;
  }

  HermitianEigen out;
  out.values = std::move(d);
  if (!opt.want_vectors) {
    detail::tqli<double>(out.values, eq, nullptr, opt.label);
    detail::sort_eigen<double>(out.values, nullptr);
    return out;
  }

  ComplexMatrix q(n, n);
  for (int i = 0; i < n; ++i) q(i, i) = ph[i];
  for (int k = n - 3; k >= 0; --k) {
    if (taus[k] == 0.0) continue;
    double tau = taus[k];
    for (int col = 0; col < n; ++col) {
      C s(0.0, 0.0);
      for (int i = k + 1; i < n; ++i) s += std::conj(a(i, k)) * q(i, col);
      s *= tau;
      for (int i = k + 1; i < n; ++i) q(i, col) -= s * a(i, k);
    }
  }
  detail::tqli<C>(out.values, eq, &q, opt.label);
  out.vectors = std::move(q);
  detail::sort_eigen<C>(out.values, &out.vectors);
  return out;
}

/// max_j ||A v_j - lambda_j v_j||_2, the eigensolver residual contract.
inline double hermitian_residual(const ComplexMatrix& a,
                                 const std::vector<double>& values,
                                 const ComplexMatrix& vectors) {
  const int n = a.rows();
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) {
      std::complex<double> acc(0.0, 0.0);
      for (int k = 0; k < n; ++k) acc += a(i, k) * vectors(k, j);
      acc -= values[static_cast<std::size_t>(j)] * vectors(i, j);
      r2 += std::norm(acc);
    }
    worst = std::max(worst, std::sqrt(r2));
  }
  return worst;
}

template <typename T>
double frobenius_norm(const Matrix<T>& a) {
  double s = 0.0;
  for (const auto& v : a.data()) s += std::norm(std::complex<double>(v));
  return std::sqrt(s);
}

}  // namespace rmc
