#include "recon/init_schemes.hpp"

#include <numeric>

namespace recon {

namespace {

Matrix uniform01_matrix(std::size_t n, std::size_t k, RngStream& rng) {
  Matrix x(n, k);
  for (double& v : x.flat()) v = rng.uniform01();
  return x;
}

std::vector<std::size_t> sample_rows(std::size_t pool_size, std::size_t n, RngStream& rng) {
  require(pool_size >= n, "make_init: partition pool smaller than requested rows");
  std::vector<std::size_t> idx(pool_size);
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle_indices(idx);
  idx.resize(n);
  return idx;
}

Matrix gather_rows(const Matrix& pool, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), pool.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = pool.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace

InitResult make_init(const InitScheme& scheme, std::size_t n, std::size_t k,
                     const InitSources* sources, RngStream& rng) {
  InitResult res;
  switch (scheme.kind) {
    case InitKind::Uniform01:
      res.x0 = uniform01_matrix(n, k, rng);
      break;
    case InitKind::Gaussian: {
      require(scheme.sigma > 0.0, "make_init: Gaussian sigma must be positive");
      res.x0 = Matrix(n, k);
      for (double& v : res.x0.flat()) v = scheme.sigma * rng.gaussian();
      break;
    }
    case InitKind::GroundTruth:
      require(sources != nullptr, "make_init: GroundTruth init needs sources");
      require(sources->ground_truth.rows() == n && sources->ground_truth.cols() == k,
              "make_init: ground-truth source shape mismatch");
      res.x0 = sources->ground_truth;
      break;
    case InitKind::Partition: {
      require(sources != nullptr, "make_init: Partition init needs sources");
      require(sources->partition_pool.cols() == k, "make_init: partition pool width mismatch");
      res.partition_rows = sample_rows(sources->partition_pool.rows(), n, rng);
      res.x0 = gather_rows(sources->partition_pool, res.partition_rows);
      break;
    }
    case InitKind::Mix: {
      require(sources != nullptr, "make_init: Mix init needs sources");
      require(sources->ground_truth.rows() == n && sources->ground_truth.cols() == k,
              "make_init: ground-truth source shape mismatch");
      require(sources->partition_pool.cols() == k, "make_init: partition pool width mismatch");
      res.partition_rows = sample_rows(sources->partition_pool.rows(), n, rng);
      const Matrix x_part = gather_rows(sources->partition_pool, res.partition_rows);
      const Matrix x_rnd = uniform01_matrix(n, k, rng);
      res.x0 = mix_init(scheme.mix, sources->ground_truth, x_part, x_rnd);
      break;
    }
  }
  return res;
}

Matrix mix_init(const MixScheme& m, const Matrix& x_gt, const Matrix& x_part, const Matrix& x_rnd) {
  require(m.lambda1 >= 0.0 && m.lambda1 <= 1.0 && m.lambda2 >= 0.0 && m.lambda2 <= 1.0,
          "mix_init: lambdas must lie in [0,1]");
  require(x_gt.same_shape(x_part) && x_gt.same_shape(x_rnd), "mix_init: source shape mismatch");
  Matrix out(x_gt.rows(), x_gt.cols());
  const double c_gt = m.lambda2 * m.lambda1;
  const double c_part = m.lambda2 * (1.0 - m.lambda1);
  const double c_rnd = 1.0 - m.lambda2;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = c_gt * x_gt.data()[i] + c_part * x_part.data()[i] + c_rnd * x_rnd.data()[i];
  }
  return out;
}

std::vector<MixScheme> lambda_grid(std::span<const double> lambdas) {
  require(!lambdas.empty(), "lambda_grid: value list must be nonempty");
  std::vector<MixScheme> grid;
  grid.reserve(lambdas.size() * lambdas.size());
  for (double l1 : lambdas) {
    for (double l2 : lambdas) grid.push_back({l1, l2});
  }
  return grid;
}

}  // namespace recon
