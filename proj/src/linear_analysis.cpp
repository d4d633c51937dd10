#include "recon/linear_analysis.hpp"

#include <cmath>
#include <string>

#include "recon/errors.hpp"

namespace recon {

namespace {

void require_affine(const ParamVector& theta) {
  require(theta.spec().arch == Arch::Affine, "linear_analysis: affine model required");
}

}  // namespace

double check_stationarity(const Dataset& data, const ParamVector& theta_star, const LossSpec& loss) {
  require_affine(theta_star);
  require(data.k() == theta_star.spec().input_dim, "check_stationarity: dimension mismatch");
  const Vector z = forward(theta_star, data.inputs);
  const double invn = 1.0 / static_cast<double>(data.n());
  Matrix dl(data.n(), 1);
  for (std::size_t i = 0; i < data.n(); ++i) dl(i, 0) = invn * loss_dz(loss.kind, z[i], data.labels[i]);
  const Matrix xbar = data.augmented();
  Matrix r(xbar.cols(), 1);
  gemm_tn(xbar.data(), xbar.rows(), xbar.cols(), dl.data(), 1, r.data());
  return nrm2(r.flat());
}

UnderdeterminationReport underdetermination_report(std::size_t n, std::size_t k, std::size_t l,
                                                   const Dataset* data, const ParamVector* theta_star,
                                                   const LossSpec* loss) {
  require(n > 0 && k > 0 && l > 0, "underdetermination_report: dims must be positive");
  UnderdeterminationReport rep;
  rep.n_equations = l * n;
  rep.n_unknowns = n * k;
  if (data) {
    require(data->n() == n && data->k() == k, "underdetermination_report: dataset shape mismatch");
    const std::size_t r = rank(data->augmented());
    rep.kernel_dim_lower_bound = n > r ? n - r : 0;
  }
  if (data && theta_star && loss) rep.residual = check_stationarity(*data, *theta_star, *loss);
  return rep;
}

Matrix construct_interpolating_inputs(const ParamVector& theta_star, const Vector& y,
                                      const Matrix* kernel_offset) {
  require_affine(theta_star);
  const auto w = theta_star.weight(0);
  const double b = theta_star.bias(0)[0];
  const std::size_t k = w.size();
  const double wsq = dot(w, w);

  if (wsq == 0.0) {
    for (double yi : y) {
      if (yi != b) {
        throw NumericError("construct_interpolating_inputs: w = 0 admits no solution unless every "
                           "target equals the bias");
      }
    }
    return Matrix(y.size(), k, 0.0);  // any inputs work; zero is the minimum-norm choice
  }

  Matrix x(y.size(), k);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double c = (y[i] - b) / wsq;
    auto row = x.row(i);
    for (std::size_t j = 0; j < k; ++j) row[j] = c * w[j];
  }

  if (kernel_offset) {
    require(kernel_offset->rows() == y.size() && kernel_offset->cols() == k,
            "construct_interpolating_inputs: offset shape mismatch");
    // project each offset row onto ker(w^T) so the fit stays exact
    for (std::size_t i = 0; i < y.size(); ++i) {
      auto row = x.row(i);
      const auto off = kernel_offset->row(i);
      const double proj = dot(off, std::span<const double>(w)) / wsq;
      for (std::size_t j = 0; j < k; ++j) row[j] += off[j] - proj * w[j];
    }
  }
  return x;
}

Dataset construct_collapse(const Vector& x_seed, const ParamVector& theta_star, double y_target,
                           std::size_t n, double margin_min) {
  require(y_target == 1.0 || y_target == -1.0, "construct_collapse: target label must be +-1");
  require(n >= 1, "construct_collapse: need at least one copy");
  require(x_seed.size() == theta_star.spec().input_dim, "construct_collapse: seed dimension mismatch");

  Matrix probe(1, x_seed.size());
  std::copy(x_seed.begin(), x_seed.end(), probe.row(0).begin());
  const double z = forward(theta_star, probe)[0];
  const double margin = y_target * z;
  if (margin < margin_min) {
    throw NumericError("construct_collapse: seed margin " + std::to_string(margin) +
                       " below required " + std::to_string(margin_min));
  }

  Dataset out;
  out.inputs = Matrix(n, x_seed.size());
  out.labels.assign(n, y_target);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(x_seed.begin(), x_seed.end(), out.inputs.row(i).begin());
  }

  // certify: the zero-decay logistic gradient at theta* must vanish numerically
  const LossSpec pure{LossKind::Logistic, 0.0};
  const Vector g = grad_theta(theta_star, out, pure);
  const double pen = dot(g, g);
  if (!(pen <= 1e-12)) {
    throw NumericError("construct_collapse: penalty " + std::to_string(pen) +
                       " exceeds 1e-12; margin too small for this parameter scale");
  }
  return out;
}

Vector push_to_margin(const ParamVector& theta_star, const Vector& x_seed, double y,
                      double target_margin) {
  require_affine(theta_star);
  require(x_seed.size() == theta_star.spec().input_dim, "push_to_margin: dimension mismatch");
  const auto w = theta_star.weight(0);
  const double b = theta_star.bias(0)[0];
  const double wsq = dot(w, w);
  require(wsq > 0.0, "push_to_margin: zero weight vector cannot change the margin");
  const double z0 = dot(std::span<const double>(x_seed), std::span<const double>(w)) + b;
  const double t = (target_margin - y * z0) / wsq;
  Vector x = x_seed;
  if (t > 0.0) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += t * y * w[j];
  }
  return x;
}

}  // namespace recon
