#include "recon/gradpen.hpp"

#include <cmath>

#include "recon/errors.hpp"

namespace recon {

double penalty(const ParamVector& theta_star, const Dataset& data, const LossSpec& loss) {
  const Vector g = grad_theta(theta_star, data, loss);
  const double v = dot(g, g);
  if (!std::isfinite(v)) throw NumericError("penalty: non-finite value");
  return v;
}

Matrix penalty_grad_x(const ParamVector& theta_star, const Dataset& data, const LossSpec& loss) {
  Vector p = grad_theta(theta_star, data, loss);
  scale(p, 2.0);
  return mixed_vjp(theta_star, data, loss, p);
}

ReconResult reconstruct_gradpen(const ParamVector& theta_star, const Vector& y, const Matrix& x0,
                                const LossSpec& loss, const GradPenConfig& cfg) {
  const ModelSpec& spec = theta_star.spec();
  require(x0.cols() == spec.input_dim, "reconstruct_gradpen: x0 width does not match spec");
  require(x0.rows() == y.size(), "reconstruct_gradpen: x0 rows do not match label count");
  require(cfg.lr > 0.0, "reconstruct_gradpen: lr must be positive");
  require(cfg.momentum >= 0.0 && cfg.momentum < 1.0, "reconstruct_gradpen: momentum must be in [0,1)");

  ReconResult out;
  Dataset cand{x0, y};
  cand.validate();

  double lr = cfg.lr;
  double pen = penalty(theta_star, cand, loss);
  Matrix velocity(cand.n(), cand.k(), 0.0);
  const double stop_thresh = cfg.stop_tol * static_cast<double>(cand.n() * cand.k());
  std::size_t backoffs = 0;

  for (std::size_t k = 0;; ++k) {
    Matrix g = penalty_grad_x(theta_star, cand, loss);
    const double gn = frob_norm(g);
    if (!std::isfinite(gn)) throw NumericError("reconstruct_gradpen: non-finite penalty gradient");
    out.trace.push_back({k, pen, gn, 0.0, lr});

    if (gn <= stop_thresh) {
      out.converged = true;
      break;
    }
    if (k >= cfg.iters) break;

    for (std::size_t i = 0; i < velocity.size(); ++i) {
      velocity.data()[i] = cfg.momentum * velocity.data()[i] - lr * g.data()[i];
    }
    Matrix x_try = cand.inputs;
    axpy(1.0, velocity.flat(), x_try.flat());
    Dataset cand_try{std::move(x_try), y};
    const double pen_try = penalty(theta_star, cand_try, loss);
    if (pen_try <= pen) {
      cand = std::move(cand_try);
      pen = pen_try;
    } else {
      // geometric lr backoff; momentum restarts so the next step is pure descent
      lr *= 0.5;
      std::fill(velocity.flat().begin(), velocity.flat().end(), 0.0);
      if (++backoffs > cfg.max_backoffs) break;
    }
  }

  out.x_rec = cand.inputs;
  out.theta_final = theta_star.flat;
  out.theta_dist = 0.0;  // theta never moves in this attack
  return out;
}

}  // namespace recon
