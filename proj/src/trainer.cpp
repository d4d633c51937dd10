#include "recon/trainer.hpp"

#include <cmath>

#include "recon/errors.hpp"
#include "recon/rng.hpp"

namespace recon {

TrainReport gd_minimize(ParamVector theta0, const Dataset& data, const LossSpec& loss,
                        const TrainConfig& cfg) {
  require(cfg.lr > 0.0, "train: lr must be positive");
  require(cfg.grad_tol > 0.0, "train: grad_tol must be positive");
  require(cfg.momentum >= 0.0 && cfg.momentum < 1.0, "train: momentum must be in [0,1)");
  data.validate();

  TrainReport rep{std::move(theta0), 0.0, 0, false, {}};
  Vector velocity(rep.theta_star.size(), 0.0);
  rep.energy_trace.reserve(256);

  Vector g;
  for (std::size_t it = 0; it <= cfg.max_iters; ++it) {
    const double e = energy_and_grad_theta(rep.theta_star, data, loss, g);
    rep.energy_trace.push_back(e);
    rep.final_grad_norm = nrm2(g);
    rep.iters_used = it;
    if (!std::isfinite(rep.final_grad_norm)) {
      throw NumericError("train: diverged (non-finite gradient) at iter " + std::to_string(it));
    }
    if (rep.final_grad_norm <= cfg.grad_tol) {
      rep.converged = true;
      break;
    }
    if (it == cfg.max_iters) break;  // budget exhausted, converged stays false
    for (std::size_t i = 0; i < velocity.size(); ++i) {
      velocity[i] = cfg.momentum * velocity[i] - cfg.lr * g[i];
      rep.theta_star.flat[i] += velocity[i];
    }
  }
  return rep;
}

TrainReport train(const ModelSpec& spec, const Dataset& data, const LossSpec& loss,
                  const TrainConfig& cfg) {
  ParamVector theta0(spec);
  RngStream rng(cfg.seed, stream_id_for("theta-init"));
  for (double& w : theta0.flat) {
    w = cfg.theta_init == ThetaInit::UniformStd ? rng.uniform01() : cfg.init_sigma * rng.gaussian();
  }
  return gd_minimize(std::move(theta0), data, loss, cfg);
}

}  // namespace recon
