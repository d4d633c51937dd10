#pragma once

// Bilevel reconstruction: recover training inputs x from trained weights
// theta* by descending l(theta*, theta(x)) = 0.5 |theta(x) - theta*|^2
// through the lower-level solution map. The hypergradient comes from
// implicit differentiation: with H = d2E/dtheta2 at theta(x),
//
//   dl/dx = - d/dx < dE/dtheta, p >,   (H + mu I) p = theta(x) - theta*,
//
// p computed matrix-free by conjugate gradients on hvp_theta. The x update
// is plain gradient descent on l with geometric step backoff, so the upper
// loss trace never increases.

#include "recon/model.hpp"
#include "recon/recon_result.hpp"
#include "recon/trainer.hpp"

namespace recon {

struct CgConfig {
  std::size_t max_iters = 0;  // 0 means param_count
  double tol = 1e-8;          // relative residual target
  double damping = 1e-6;      // mu added to the Hessian diagonal
};

struct CgResult {
  Vector x;
  std::size_t iters = 0;
  bool converged = false;
  double rel_residual = 0.0;
  bool negative_curvature = false;
};

struct ReconConfig {
  double eta = 1.0;              // upper-level learning rate (also the step-size cap)
  std::size_t outer_iters = 500;
  double stop_tol = 1e-10;       // stop when |hypergrad|_F <= stop_tol * N * K
  TrainConfig lower;             // warm-started lower solver settings
  CgConfig cg;
  bool project_box = false;      // optionally clamp x to [0,1] after each step
  std::size_t max_backtracks = 60;
  // |step|_inf cap per outer iteration; the inverse Hessian can blow the raw
  // hypergradient up by 1/rho, so untamed first steps leave the data range
  double max_step_inf = 1.0;

  ReconConfig() {
    lower.grad_tol = 1e-8;
    lower.max_iters = 200000;
  }
};

// Lower-level solve from a warm start. Postcondition (hard requirement for
// implicit differentiation): |dE/dtheta| <= lower_cfg.grad_tol; throws
// NumericError otherwise.
ParamVector solve_lower(const Dataset& data, const LossSpec& loss, const TrainConfig& lower_cfg,
                        const ParamVector& theta_warm);

// p with |(H + mu I) p - g| <= tol |g|, never materializing H.
CgResult inv_hvp(const ParamVector& theta, const Dataset& data, const LossSpec& loss,
                 const Vector& g, const CgConfig& cg);

// dl/dx at the given candidate inputs, via lower solve + inv_hvp + mixed_vjp.
// theta_at_x, when non-null, receives the lower-level solution.
Matrix hypergradient(const ParamVector& theta_star, const Dataset& candidate, const LossSpec& loss,
                     const ReconConfig& cfg, ParamVector* theta_at_x = nullptr);

// The full attack. Labels y are fixed and known; x0 is the initialization.
ReconResult reconstruct(const ParamVector& theta_star, const Vector& y, const Matrix& x0,
                        const LossSpec& loss, const ReconConfig& cfg);

}  // namespace recon
