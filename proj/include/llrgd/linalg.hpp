#pragma once

// Dense real linear algebra and finite-difference calculus for small n.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <type_traits>
#include <utility>
#include <vector>

#include "llrgd/error.hpp"

namespace llrgd {

using Vector = std::vector<double>;

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

inline bool all_finite(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

inline double dot(const Vector& a, const Vector& b) {
  require_dim(b.size(), a.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vector& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline double norm_inf(const Vector& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline Vector add(const Vector& a, const Vector& b) {
  require_dim(b.size(), a.size(), "add");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vector sub(const Vector& a, const Vector& b) {
  require_dim(b.size(), a.size(), "sub");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vector scale(const Vector& a, double s) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

/// a + s*b
inline Vector axpy(const Vector& a, double s, const Vector& b) {
  require_dim(b.size(), a.size(), "axpy");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * b[i];
  return r;
}

inline double distance(const Vector& a, const Vector& b) { return norm2(sub(a, b)); }

// ---------------------------------------------------------------------------
// SymMatrix: packed lower triangle, so symmetry holds structurally.
// ---------------------------------------------------------------------------

class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * (n + 1) / 2, fill) {}

  /// Rows of a full square matrix; throws unless it is exactly symmetric.
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows) : SymMatrix(rows.size()) {
    std::vector<Vector> full;
    for (const auto& r : rows) full.emplace_back(r);
    *this = from_full(full);
  }

  static SymMatrix identity(std::size_t n) {
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1.0);
    return m;
  }

  static SymMatrix diagonal(const Vector& d) {
    SymMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m.set(i, i, d[i]);
    return m;
  }

  static SymMatrix from_full(const std::vector<Vector>& full) {
    const std::size_t n = full.size();
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
      require_dim(full[i].size(), n, "SymMatrix::from_full row");
      for (std::size_t j = 0; j <= i; ++j) {
        if (full[i][j] != full[j][i]) throw DimensionError("SymMatrix::from_full: matrix not symmetric");
        m.set(i, j, full[i][j]);
      }
    }
    return m;
  }

  std::size_t size() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[index(i, j)]; }
  void set(std::size_t i, std::size_t j, double v) noexcept { data_[index(i, j)] = v; }

  bool finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double a) { return std::isfinite(a); });
  }

  double frobenius() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j) * (*this)(i, j);
    return std::sqrt(s);
  }

  Vector operator*(const Vector& v) const {
    require_dim(v.size(), n_, "SymMatrix * Vector");
    Vector r(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) r[i] += (*this)(i, j) * v[j];
    return r;
  }

  /// uᵀ A v
  double bilinear(const Vector& u, const Vector& v) const { return dot(u, (*this) * v); }

  std::vector<Vector> to_full() const {
    std::vector<Vector> f(n_, Vector(n_));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) f[i][j] = (*this)(i, j);
    return f;
  }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  static std::size_t index(std::size_t i, std::size_t j) noexcept {
    if (i < j) std::swap(i, j);
    return i * (i + 1) / 2 + j;
  }

  std::size_t n_ = 0;
  Vector data_;
};

// ---------------------------------------------------------------------------
// Symmetric eigensolver (cyclic Jacobi)
// ---------------------------------------------------------------------------

struct EigenDecomposition {
  Vector eigenvalues;                ///< ascending
  std::vector<Vector> eigenvectors;  ///< eigenvectors[k] pairs with eigenvalues[k]

  double min() const { return eigenvalues.front(); }
  double max() const { return eigenvalues.back(); }
  double max_abs() const { return std::max(std::abs(min()), std::abs(max())); }
};

inline constexpr int kJacobiMaxSweeps = 100;

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Throws NumericalError on non-finite input or if 100 sweeps do not converge.
inline EigenDecomposition sym_eigen(const SymMatrix& A) {
  const std::size_t n = A.size();
  if (n == 0) throw DimensionError("sym_eigen: empty matrix");
  if (!A.finite()) throw NumericalError("sym_eigen: non-finite matrix entry");

  std::vector<Vector> a = A.to_full();
  std::vector<Vector> v(n, Vector(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  const double scale = std::max(A.frobenius(), std::numeric_limits<double>::min());
  auto off_diagonal = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a[i][j] * a[i][j];
    return std::sqrt(2.0 * s);
  };

  bool converged = false;
  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    if (off_diagonal() <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p][q];
        if (apq == 0.0) continue;
        // Rotation angle zeroing a[p][q] (Golub & Van Loan, symmetric Schur).
        const double tau = (a[q][q] - a[p][p]) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        a[p][q] = a[q][p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && off_diagonal() > 1e-15 * scale) {
    throw NumericalError("sym_eigen: Jacobi iteration did not converge in 100 sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a[i][i] < a[j][j]; });

  EigenDecomposition out;
  out.eigenvalues.reserve(n);
  out.eigenvectors.reserve(n);
  for (std::size_t k : order) {
    out.eigenvalues.push_back(a[k][k]);
    Vector col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v[i][k];
    const double nrm = norm2(col);
    for (double& c : col) c /= nrm;
    out.eigenvectors.push_back(std::move(col));
  }
  return out;
}

inline double spectral_norm(const SymMatrix& A) { return sym_eigen(A).max_abs(); }

inline double determinant(const EigenDecomposition& e) {
  double d = 1.0;
  for (double l : e.eigenvalues) d *= l;
  return d;
}

/// Relative zero test for eigenvalues: |λ| ≤ τ·max(1, max|λ|).
inline constexpr double kDefaultZeroTau = 1e-6;

inline double zero_threshold(const EigenDecomposition& e, double tau = kDefaultZeroTau) {
  return tau * std::max(1.0, e.max_abs());
}

/// Solves A x = b through the eigen-decomposition; throws NumericalError when
/// some |λ| ≤ rel_tol·max(1, max|λ|).
inline Vector solve_symmetric(const SymMatrix& A, const Vector& b, double rel_tol = 1e-13) {
  require_dim(b.size(), A.size(), "solve_symmetric");
  const EigenDecomposition e = sym_eigen(A);
  const double floor = rel_tol * std::max(1.0, e.max_abs());
  Vector x(b.size(), 0.0);
  for (std::size_t k = 0; k < e.eigenvalues.size(); ++k) {
    const double lam = e.eigenvalues[k];
    if (std::abs(lam) <= floor) throw NumericalError("solve_symmetric: singular matrix");
    const double coef = dot(e.eigenvectors[k], b) / lam;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += coef * e.eigenvectors[k][i];
  }
  return x;
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

inline double default_fd_step1(const Vector& x) { return 1e-5 * std::max(1.0, norm_inf(x)); }
inline double default_fd_step2(const Vector& x) { return 1e-4 * std::max(1.0, norm_inf(x)); }

/// Anything callable as double(const Vector&).
template <class F>
concept ScalarField = std::is_invocable_r_v<double, F&, const Vector&>;

namespace detail {
template <class F>
double eval_checked(F&& f, const Vector& x) {
  const double v = f(x);
  if (!std::isfinite(v)) throw NumericalError("finite difference: non-finite function value");
  return v;
}
}  // namespace detail

/// Central-difference gradient, O(h²).
template <ScalarField F>
Vector fd_gradient(F&& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw ConfigError("fd_gradient: step must be positive");
  Vector g(x.size());
  Vector xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = detail::eval_checked(f, xp);
    xp[i] = x[i] - h;
    const double fm = detail::eval_checked(f, xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

template <ScalarField F>
Vector fd_gradient(F&& f, const Vector& x) {
  return fd_gradient(std::forward<F>(f), x, default_fd_step1(x));
}

/// Second-order central stencil Hessian; off-diagonals use the four-point
/// cross stencil, which is symmetric in (i, j) by construction.
template <ScalarField F>
SymMatrix fd_hessian(F&& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw ConfigError("fd_hessian: step must be positive");
  const std::size_t n = x.size();
  SymMatrix H(n);
  const double f0 = detail::eval_checked(f, x);
  Vector xp = x;
  for (std::size_t i = 0; i < n; ++i) {
    xp[i] = x[i] + h;
    const double fp = detail::eval_checked(f, xp);
    xp[i] = x[i] - h;
    const double fm = detail::eval_checked(f, xp);
    xp[i] = x[i];
    H.set(i, i, (fp - 2.0 * f0 + fm) / (h * h));
    for (std::size_t j = 0; j < i; ++j) {
      auto at = [&](double si, double sj) {
        xp[i] = x[i] + si * h;
        xp[j] = x[j] + sj * h;
        const double v = detail::eval_checked(f, xp);
        xp[i] = x[i];
        xp[j] = x[j];
        return v;
      };
      const double fpp = at(1, 1), fpm = at(1, -1), fmp = at(-1, 1), fmm = at(-1, -1);
      H.set(i, j, (fpp - fpm - fmp + fmm) / (4.0 * h * h));
    }
  }
  return H;
}

template <ScalarField F>
SymMatrix fd_hessian(F&& f, const Vector& x) {
  return fd_hessian(std::forward<F>(f), x, default_fd_step2(x));
}

/// Third directional derivative vᵀ∇³f(x)(v,v) = d³/dt³ f(x + t v) at t = 0,
/// from the five-point central stencil on the line through x.
template <ScalarField F>
double third_directional(F&& f, const Vector& x, const Vector& v, double h) {
  require_dim(v.size(), x.size(), "third_directional");
  if (!(h > 0.0)) throw ConfigError("third_directional: step must be positive");
  if (std::abs(norm2(v) - 1.0) > 1e-12) throw ConfigError("third_directional: direction must be a unit vector");
  auto on_line = [&](double t) { return detail::eval_checked(f, axpy(x, t, v)); };
  return (on_line(2 * h) - 2.0 * on_line(h) + 2.0 * on_line(-h) - on_line(-2 * h)) / (2.0 * h * h * h);
}

template <ScalarField F>
double third_directional(F&& f, const Vector& x, const Vector& v) {
  return third_directional(std::forward<F>(f), x, v, default_fd_step2(x));
}

/// ‖a − b‖₂ / max(‖a‖₂, ‖b‖₂, floor). With floor = 1 this is the
/// "relative unless tiny" error used for derivative oracles.
inline double relative_error(const Vector& a, const Vector& b, double floor = 1.0) {
  return norm2(sub(a, b)) / std::max({norm2(a), norm2(b), floor});
}

inline double relative_error(const SymMatrix& a, const SymMatrix& b, double floor = 1.0) {
  require_dim(b.size(), a.size(), "relative_error");
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) diff += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
  return std::sqrt(diff) / std::max({a.frobenius(), b.frobenius(), floor});
}

}  // namespace llrgd
