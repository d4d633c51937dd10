#pragma once

// Full-batch gradient descent with momentum on the training energy.
// Deterministic given (seed, data); the same loop also serves as the
// warm-started lower-level solver of the bilevel attack.

#include <cstdint>

#include "recon/model.hpp"

namespace recon {

enum class ThetaInit { UniformStd, Gaussian };

struct TrainConfig {
  double lr = 0.05;
  double momentum = 0.9;
  std::size_t max_iters = 200000;
  double grad_tol = 1e-8;
  std::uint64_t seed = 0;
  ThetaInit theta_init = ThetaInit::UniformStd;
  double init_sigma = 1.0;  // Gaussian init only
};

struct TrainReport {
  ParamVector theta_star;
  double final_grad_norm = 0.0;
  std::size_t iters_used = 0;
  bool converged = false;
  Vector energy_trace;
};

// theta0 drawn from cfg.seed, then gd_minimize. Throws NumericError when the
// energy diverges to a non-finite value.
TrainReport train(const ModelSpec& spec, const Dataset& data, const LossSpec& loss,
                  const TrainConfig& cfg);

// the raw descent loop, continuing from an explicit starting point
TrainReport gd_minimize(ParamVector theta0, const Dataset& data, const LossSpec& loss,
                        const TrainConfig& cfg);

}  // namespace recon
