// Throughput comparison of the serial reference kernels against the OpenMP
// entry points, plus the derivative stack built on them. Run manually:
//   ./bench_kernels [dim]

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <omp.h>

#include "recon/linalg.hpp"
#include "recon/model.hpp"
#include "recon/rng.hpp"

using namespace recon;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, RngStream& rng) {
  Matrix m(r, c);
  for (double& v : m.flat()) v = rng.uniform(-1.0, 1.0);
  return m;
}

double time_loop(std::size_t reps, const std::function<void()>& fn) {
  fn();  // warm-up
  const double t0 = omp_get_wtime();
  for (std::size_t i = 0; i < reps; ++i) fn();
  return (omp_get_wtime() - t0) / static_cast<double>(reps);
}

void report(const char* name, double flops, double t_serial, double t_par) {
  std::printf("%-22s serial %8.3f ms (%6.2f GF/s)   omp %8.3f ms (%6.2f GF/s)   speedup %.2fx\n",
              name, t_serial * 1e3, flops / t_serial * 1e-9, t_par * 1e3, flops / t_par * 1e-9,
              t_serial / t_par);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t dim = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 512;
  const std::size_t reps = dim >= 1024 ? 3 : 10;
  std::printf("threads: %d, dim: %zu\n", omp_get_max_threads(), dim);

  RngStream rng(42, 0);
  const Matrix a = random_matrix(dim, dim, rng);
  const Matrix b = random_matrix(dim, dim, rng);
  Matrix c(dim, dim);
  Vector x(dim), y(dim);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);

  const double gemm_flops = 2.0 * dim * dim * dim;
  report("gemm_nn", gemm_flops,
         time_loop(reps, [&] { serial::gemm_nn(a.data(), dim, dim, b.data(), dim, c.data()); }),
         time_loop(reps, [&] { gemm_nn(a.data(), dim, dim, b.data(), dim, c.data()); }));
  report("gemm_nt", gemm_flops,
         time_loop(reps, [&] { serial::gemm_nt(a.data(), dim, dim, b.data(), dim, c.data()); }),
         time_loop(reps, [&] { gemm_nt(a.data(), dim, dim, b.data(), dim, c.data()); }));
  report("gemm_tn", gemm_flops,
         time_loop(reps, [&] { serial::gemm_tn(a.data(), dim, dim, b.data(), dim, c.data()); }),
         time_loop(reps, [&] { gemm_tn(a.data(), dim, dim, b.data(), dim, c.data()); }));
  report("gemv", 2.0 * dim * dim,
         time_loop(reps * 50, [&] { serial::gemv(a.data(), dim, dim, x.data(), y.data()); }),
         time_loop(reps * 50, [&] { gemv(a.data(), dim, dim, x.data(), y.data()); }));

  // derivative stack on a mid-size one-hidden model (gemm-bound)
  const std::size_t n = 64, k = dim / 2, h = dim;
  const ModelSpec spec = ModelSpec::one_hidden(k, h, Activation::Softplus, 20.0);
  ParamVector theta(spec);
  for (double& v : theta.flat) v = 0.05 * rng.gaussian();
  Dataset data;
  data.inputs = random_matrix(n, k, rng);
  data.labels.assign(n, 1.0);
  for (std::size_t i = 0; i < n / 2; ++i) data.labels[i] = -1.0;
  const LossSpec loss{LossKind::Logistic, 1e-4};
  Vector v(theta.size());
  for (double& t : v) t = rng.gaussian();

  const double pass_flops = 2.0 * n * (k * h + h);  // one forward, order of magnitude
  std::printf("\nderivative stack (N=%zu, K=%zu, H=%zu):\n", n, k, h);
  std::printf("  grad_theta  %8.3f ms\n",
              1e3 * time_loop(20, [&] { (void)grad_theta(theta, data, loss); }));
  std::printf("  hvp_theta   %8.3f ms\n",
              1e3 * time_loop(20, [&] { (void)hvp_theta(theta, data, loss, v); }));
  std::printf("  mixed_vjp   %8.3f ms\n",
              1e3 * time_loop(20, [&] { (void)mixed_vjp(theta, data, loss, v); }));
  std::printf("  (forward ~ %.1f MFLOP)\n", pass_flops * 1e-6);
  return 0;
}
