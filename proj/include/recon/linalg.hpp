#pragma once

// Dense row-major float64 kernels. Each kernel exists twice: a naive serial
// reference under recon::serial and an OpenMP version used by the library.
// Both accumulate every output element in the same floating-point order, so
// results are bit-identical for any thread count. bench_kernels compares
// their throughput; the unit tests compare their outputs.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace recon {

using Vector = std::vector<double>;

// Throws std::invalid_argument. Used for shape and precondition checks.
void require(bool cond, const std::string& msg);

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> flat() { return {data_.data(), data_.size()}; }
  std::span<const double> flat() const { return {data_.data(), data_.size()}; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Vector data_;
};

// Work below this many inner-loop operations runs on the calling thread; a
// GOMP team setup costs microseconds, which would dominate the small batched
// passes the solvers make millions of.
inline constexpr std::size_t kParGrain = 65536;

// fn(i) for i in [0, n); parallel only when the caller's work estimate says so
template <class F>
void par_for(std::size_t n, bool parallel, F&& fn) {
  if (!parallel) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    fn(static_cast<std::size_t>(i));
  }
}

// ---- raw-pointer kernels (OpenMP) ------------------------------------------
// c (n x m) = a (n x k) * b (k x m)
void gemm_nn(const double* a, std::size_t n, std::size_t k, const double* b, std::size_t m, double* c);
// c (n x m) = a (n x k) * b (m x k)^T
void gemm_nt(const double* a, std::size_t n, std::size_t k, const double* b, std::size_t m, double* c);
// c (p x q) = a (n x p)^T * b (n x q)
void gemm_tn(const double* a, std::size_t n, std::size_t p, const double* b, std::size_t q, double* c);
// y (n) = a (n x k) * x (k)
void gemv(const double* a, std::size_t n, std::size_t k, const double* x, double* y);

namespace serial {
void gemm_nn(const double* a, std::size_t n, std::size_t k, const double* b, std::size_t m, double* c);
void gemm_nt(const double* a, std::size_t n, std::size_t k, const double* b, std::size_t m, double* c);
void gemm_tn(const double* a, std::size_t n, std::size_t p, const double* b, std::size_t q, double* c);
void gemv(const double* a, std::size_t n, std::size_t k, const double* x, double* y);
}  // namespace serial

// ---- Matrix/Vector convenience wrappers -------------------------------------
Vector matvec(const Matrix& a, const Vector& v);
Matrix matmul(const Matrix& a, const Matrix& b);     // a * b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T * b

double dot(std::span<const double> a, std::span<const double> b);
double nrm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);  // y += alpha*x
void scale(std::span<double> a, double s);

Vector vec_sub(const Vector& a, const Vector& b);
Matrix mat_sub(const Matrix& a, const Matrix& b);
Matrix mat_add_scaled(const Matrix& a, double alpha, const Matrix& b);  // a + alpha*b
double frob_norm(const Matrix& a);

// column sums of a (n x m) -> length-m vector, rows accumulated in index order
Vector col_sums(const Matrix& a);

// ---- small dense solvers (oracles, rank computations) -----------------------
// LU with partial pivoting; throws NumericError on (numerically) singular A.
Vector solve_dense(Matrix a, Vector b);
// Rank via row echelon with partial pivoting; tol <= 0 picks an eps-based default.
std::size_t rank(Matrix a, double tol = -1.0);

}  // namespace recon
