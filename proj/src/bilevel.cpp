#include "recon/bilevel.hpp"

#include <algorithm>
#include <cmath>

#include "recon/errors.hpp"

namespace recon {

ParamVector solve_lower(const Dataset& data, const LossSpec& loss, const TrainConfig& lower_cfg,
                        const ParamVector& theta_warm) {
  TrainReport rep = gd_minimize(theta_warm, data, loss, lower_cfg);
  if (!rep.converged) {
    throw NumericError("solve_lower: lower-level solve did not reach grad_tol (" +
                       std::to_string(rep.final_grad_norm) + " after " +
                       std::to_string(rep.iters_used) + " iters); implicit differentiation invalid");
  }
  return std::move(rep.theta_star);
}

CgResult inv_hvp(const ParamVector& theta, const Dataset& data, const LossSpec& loss,
                 const Vector& g, const CgConfig& cg) {
  require(g.size() == theta.size(), "inv_hvp: rhs length mismatch");
  require(cg.tol > 0.0, "inv_hvp: cg tol must be positive");
  require(cg.damping >= 0.0, "inv_hvp: damping must be nonnegative");

  CgResult res;
  res.x.assign(g.size(), 0.0);
  const double gnorm = nrm2(g);
  if (gnorm == 0.0) {
    res.converged = true;
    return res;
  }

  const std::size_t max_iters = cg.max_iters > 0 ? cg.max_iters : theta.size();
  Vector r = g;  // residual of (H + mu I) p = g at p = 0
  Vector d = r;
  double rs = dot(r, r);

  for (std::size_t it = 1; it <= max_iters; ++it) {
    Vector q = hvp_theta(theta, data, loss, d);
    if (cg.damping > 0.0) axpy(cg.damping, d, q);
    const double dq = dot(d, q);
    res.iters = it;
    if (!(dq > 0.0)) {  // curvature at or below zero despite damping
      res.negative_curvature = true;
      break;
    }
    const double alpha = rs / dq;
    axpy(alpha, d, res.x);
    axpy(-alpha, q, r);
    const double rs_new = dot(r, r);
    if (std::sqrt(rs_new) <= cg.tol * gnorm) {
      res.converged = true;
      rs = rs_new;
      break;
    }
    const double beta = rs_new / rs;
    rs = rs_new;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = r[i] + beta * d[i];
  }
  res.rel_residual = std::sqrt(rs) / gnorm;
  return res;
}

namespace {

// CG with escalating damping on curvature breakdowns; SPD lower problems
// never take the retry path.
Vector solve_p(const ParamVector& theta, const Dataset& data, const LossSpec& loss, const Vector& d,
               CgConfig cg, std::size_t& damping_bumps) {
  for (int attempt = 0; attempt < 4; ++attempt) {
    CgResult r = inv_hvp(theta, data, loss, d, cg);
    if (!r.negative_curvature) return std::move(r.x);
    cg.damping = std::max(cg.damping, 1e-10) * 100.0;
    ++damping_bumps;
  }
  throw NumericError("inv_hvp: persistent negative curvature after damping escalation");
}

Matrix descent_direction(const ParamVector& theta, const ParamVector& theta_star,
                         const Dataset& cand, const LossSpec& loss, const ReconConfig& cfg,
                         std::size_t& damping_bumps) {
  const Vector d = vec_sub(theta.flat, theta_star.flat);
  if (nrm2(d) == 0.0) return Matrix(cand.n(), cand.k(), 0.0);
  const Vector p = solve_p(theta, cand, loss, d, cfg.cg, damping_bumps);
  Matrix g = mixed_vjp(theta, cand, loss, p);
  scale(g.flat(), -1.0);  // dl/dx = - d/dx <dE/dtheta, p>
  return g;
}

void check_finite(const Matrix& g) {
  for (double v : g.flat()) {
    if (!std::isfinite(v)) throw NumericError("reconstruct: non-finite hypergradient");
  }
}

void project01(Matrix& x) {
  for (double& v : x.flat()) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace

Matrix hypergradient(const ParamVector& theta_star, const Dataset& candidate, const LossSpec& loss,
                     const ReconConfig& cfg, ParamVector* theta_at_x) {
  require(theta_star.spec().smooth(),
          "hypergradient: activation must be twice differentiable (Softplus) in bilevel mode");
  std::size_t bumps = 0;
  ParamVector theta = solve_lower(candidate, loss, cfg.lower, theta_star);
  Matrix g = descent_direction(theta, theta_star, candidate, loss, cfg, bumps);
  if (theta_at_x) *theta_at_x = theta;
  return g;
}

ReconResult reconstruct(const ParamVector& theta_star, const Vector& y, const Matrix& x0,
                        const LossSpec& loss, const ReconConfig& cfg) {
  const ModelSpec& spec = theta_star.spec();
  require(spec.smooth(),
          "reconstruct: activation must be twice differentiable (Softplus) in bilevel mode");
  require(x0.cols() == spec.input_dim, "reconstruct: x0 width does not match spec");
  require(x0.rows() == y.size(), "reconstruct: x0 rows do not match label count");
  require(cfg.eta > 0.0, "reconstruct: eta must be positive");

  ReconResult out;
  Dataset cand{x0, y};
  cand.validate();

  ParamVector theta = solve_lower(cand, loss, cfg.lower, theta_star);
  out.lower_solves = 1;
  double eta = cfg.eta;
  const double stop_thresh = cfg.stop_tol * static_cast<double>(cand.n() * cand.k());

  for (std::size_t k = 0;; ++k) {
    const Vector d = vec_sub(theta.flat, theta_star.flat);
    const double theta_dist = dot(d, d);
    const double upper = 0.5 * theta_dist;
    Matrix g = descent_direction(theta, theta_star, cand, loss, cfg, out.damping_bumps);
    check_finite(g);
    const double gn = frob_norm(g);
    out.trace.push_back({k, upper, gn, theta_dist, eta});

    if (gn <= stop_thresh) {
      out.converged = true;
      break;
    }
    if (k >= cfg.outer_iters) break;

    // Two-way backtracking keeps the upper-loss trace non-increasing: the
    // trial step doubles after each accepted iteration and halves on
    // rejection. The infinity-norm cap keeps the trial inside a sane range
    // even when the inverse Hessian has blown the gradient up.
    eta = std::min(eta * 2.0, cfg.eta);
    const double ginf = norm_inf(g.flat());
    if (ginf * eta > cfg.max_step_inf) eta = cfg.max_step_inf / ginf;

    bool accepted = false;
    for (std::size_t t = 0; t <= cfg.max_backtracks; ++t) {
      Matrix x_try = mat_add_scaled(cand.inputs, -eta, g);
      if (cfg.project_box) project01(x_try);
      Dataset cand_try{std::move(x_try), y};
      ParamVector theta_try = solve_lower(cand_try, loss, cfg.lower, theta);
      ++out.lower_solves;
      const Vector d_try = vec_sub(theta_try.flat, theta_star.flat);
      if (0.5 * dot(d_try, d_try) <= upper) {
        cand = std::move(cand_try);
        theta = std::move(theta_try);
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;  // no admissible step left at this scale
  }

  out.x_rec = cand.inputs;
  out.theta_final = theta.flat;
  const Vector d = vec_sub(theta.flat, theta_star.flat);
  out.theta_dist = dot(d, d);
  return out;
}

}  // namespace recon
