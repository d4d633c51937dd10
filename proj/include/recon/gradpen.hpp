#pragma once

// Gradient-penalty reconstruction: with theta fixed at the trained weights,
// minimize |dE/dtheta(x, y; theta*)|^2 over x by momentum gradient descent.
// The penalty gradient is 2 * d/dx <dE/dtheta, p> at p = dE/dtheta, assembled
// from mixed_vjp. ReLU activations are admitted here (subgradient semantics).

#include "recon/model.hpp"
#include "recon/recon_result.hpp"

namespace recon {

struct GradPenConfig {
  double lr = 0.1;
  double momentum = 0.9;
  std::size_t iters = 2000;
  double stop_tol = 1e-12;  // stop when |grad penalty|_F <= stop_tol * N * K
  std::size_t max_backoffs = 40;
};

// |dE/dtheta(x, y; theta*)|_2^2
double penalty(const ParamVector& theta_star, const Dataset& data, const LossSpec& loss);

// d penalty / dx
Matrix penalty_grad_x(const ParamVector& theta_star, const Dataset& data, const LossSpec& loss);

ReconResult reconstruct_gradpen(const ParamVector& theta_star, const Vector& y, const Matrix& x0,
                                const LossSpec& loss, const GradPenConfig& cfg);

}  // namespace recon
