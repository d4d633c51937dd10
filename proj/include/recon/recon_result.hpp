#pragma once

// Result types shared by both reconstruction attacks.

#include <cstddef>
#include <vector>

#include "recon/linalg.hpp"

namespace recon {

struct TraceRow {
  std::size_t iter = 0;
  double objective = 0.0;   // upper loss (bilevel) or penalty (gradpen)
  double grad_norm = 0.0;   // hypergradient / penalty-gradient Frobenius norm
  double theta_dist = 0.0;  // |theta* - theta|_2^2
  double step = 0.0;        // learning rate in effect
};

struct ReconResult {
  Matrix x_rec;
  Vector theta_final;
  double theta_dist = 0.0;
  std::vector<TraceRow> trace;
  bool converged = false;       // stopped on the gradient-norm criterion
  std::size_t lower_solves = 0;
  std::size_t damping_bumps = 0;  // CG damping raises forced by curvature breakdowns
};

}  // namespace recon
