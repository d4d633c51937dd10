#include "recon/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "recon/errors.hpp"

namespace recon {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

namespace serial {

void gemm_nn(const double* a, std::size_t n, std::size_t k, const double* b, std::size_t m, double* c) {
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = c + i * m;
    std::fill(ci, ci + m, 0.0);
    for (std::size_t t = 0; t < k; ++t) {
      const double av = a[i * k + t];
      const double* bt = b + t * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += av * bt[j];
    }
  }
}

void gemm_nt(const double* a, std::size_t n, std::size_t k, const double* b, std::size_t m, double* c) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a + i * k;
    for (std::size_t j = 0; j < m; ++j) {
      const double* bj = b + j * k;
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += ai[t] * bj[t];
      c[i * m + j] = s;
    }
  }
}

void gemm_tn(const double* a, std::size_t n, std::size_t p, const double* b, std::size_t q, double* c) {
  for (std::size_t r = 0; r < p; ++r) {
    double* cr = c + r * q;
    std::fill(cr, cr + q, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double av = a[i * p + r];
      const double* bi = b + i * q;
      for (std::size_t j = 0; j < q; ++j) cr[j] += av * bi[j];
    }
  }
}

void gemv(const double* a, std::size_t n, std::size_t k, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a + i * k;
    double s = 0.0;
    for (std::size_t t = 0; t < k; ++t) s += ai[t] * x[t];
    y[i] = s;
  }
}

}  // namespace serial

// The OpenMP kernels split work over output rows only; the loop body is the
// same as the serial reference, so each element sees the same accumulation
// order no matter how many threads run.

void gemm_nn(const double* a, std::size_t n, std::size_t k, const double* b, std::size_t m, double* c) {
  if (n * k * m <= kParGrain) return serial::gemm_nn(a, n, k, b, m, c);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    double* ci = c + i * m;
    std::fill(ci, ci + m, 0.0);
    for (std::size_t t = 0; t < k; ++t) {
      const double av = a[i * k + t];
      const double* bt = b + t * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += av * bt[j];
    }
  }
}

void gemm_nt(const double* a, std::size_t n, std::size_t k, const double* b, std::size_t m, double* c) {
  if (n * k * m <= kParGrain) return serial::gemm_nt(a, n, k, b, m, c);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const double* ai = a + i * k;
    for (std::size_t j = 0; j < m; ++j) {
      const double* bj = b + j * k;
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += ai[t] * bj[t];
      c[i * m + j] = s;
    }
  }
}

void gemm_tn(const double* a, std::size_t n, std::size_t p, const double* b, std::size_t q, double* c) {
  if (n * p * q <= kParGrain) return serial::gemm_tn(a, n, p, b, q, c);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(p); ++r) {
    double* cr = c + r * q;
    std::fill(cr, cr + q, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double av = a[i * p + r];
      const double* bi = b + i * q;
      for (std::size_t j = 0; j < q; ++j) cr[j] += av * bi[j];
    }
  }
}

void gemv(const double* a, std::size_t n, std::size_t k, const double* x, double* y) {
  if (n * k <= kParGrain) return serial::gemv(a, n, k, x, y);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const double* ai = a + i * k;
    double s = 0.0;
    for (std::size_t t = 0; t < k; ++t) s += ai[t] * x[t];
    y[i] = s;
  }
}

Vector matvec(const Matrix& a, const Vector& v) {
  require(a.cols() == v.size(), "matvec: shape mismatch");
  Vector y(a.rows());
  gemv(a.data(), a.rows(), a.cols(), v.data(), y.data());
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul: shape mismatch");
  Matrix c(a.rows(), b.cols());
  gemm_nn(a.data(), a.rows(), a.cols(), b.data(), b.cols(), c.data());
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "matmul_nt: shape mismatch");
  Matrix c(a.rows(), b.rows());
  gemm_nt(a.data(), a.rows(), a.cols(), b.data(), b.rows(), c.data());
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "matmul_tn: shape mismatch");
  Matrix c(a.cols(), b.cols());
  gemm_tn(a.data(), a.rows(), a.cols(), b.data(), b.cols(), c.data());
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double nrm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(std::span<double> a, double s) {
  for (double& v : a) v *= s;
}

Vector vec_sub(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), "vec_sub: length mismatch");
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

Matrix mat_sub(const Matrix& a, const Matrix& b) {
  require(a.same_shape(b), "mat_sub: shape mismatch");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] - b.data()[i];
  return c;
}

Matrix mat_add_scaled(const Matrix& a, double alpha, const Matrix& b) {
  require(a.same_shape(b), "mat_add_scaled: shape mismatch");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] + alpha * b.data()[i];
  return c;
}

double frob_norm(const Matrix& a) { return nrm2(a.flat()); }

Vector col_sums(const Matrix& a) {
  Vector s(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* r = a.data() + i * a.cols();
    for (std::size_t j = 0; j < a.cols(); ++j) s[j] += r[j];
  }
  return s;
}

Vector solve_dense(Matrix a, Vector b) {
  require(a.rows() == a.cols(), "solve_dense: matrix not square");
  require(a.rows() == b.size(), "solve_dense: rhs length mismatch");
  const std::size_t n = a.rows();
  std::vector<std::size_t> piv(n);
  for (std::size_t i = 0; i < n; ++i) piv[i] = i;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = col;
    double best_abs = std::abs(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(a(r, col));
      if (v > best_abs) { best = r; best_abs = v; }
    }
    if (best_abs < std::numeric_limits<double>::min() * n) {
      throw NumericError("solve_dense: singular matrix");
    }
    if (best != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(best, j));
      std::swap(b[col], b[best]);
    }
    const double inv = 1.0 / a(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) * inv;
      if (f == 0.0) continue;
      a(r, col) = 0.0;
      for (std::size_t j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
      b[r] -= f * b[col];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

std::size_t rank(Matrix a, double tol) {
  const std::size_t n = a.rows(), m = a.cols();
  if (n == 0 || m == 0) return 0;
  if (tol <= 0.0) {
    double amax = norm_inf(a.flat());
    tol = std::max(n, m) * std::numeric_limits<double>::epsilon() * std::max(amax, 1.0);
  }
  std::size_t r = 0;
  for (std::size_t col = 0; col < m && r < n; ++col) {
    std::size_t best = r;
    double best_abs = std::abs(a(r, col));
    for (std::size_t i = r + 1; i < n; ++i) {
      const double v = std::abs(a(i, col));
      if (v > best_abs) { best = i; best_abs = v; }
    }
    if (best_abs <= tol) continue;
    if (best != r) {
      for (std::size_t j = 0; j < m; ++j) std::swap(a(r, j), a(best, j));
    }
    const double inv = 1.0 / a(r, col);
    for (std::size_t i = r + 1; i < n; ++i) {
      const double f = a(i, col) * inv;
      if (f == 0.0) continue;
      for (std::size_t j = col; j < m; ++j) a(i, j) -= f * a(r, j);
    }
    ++r;
  }
  return r;
}

}  // namespace recon
