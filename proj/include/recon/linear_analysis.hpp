#pragma once

// Executable form of the linear-case analysis: the stationarity residual of
// the trained affine model, equation/unknown counting for the exact-fit
// system, a minimum-norm construction of inputs that interpolate any target
// labels, and the repeated-confident-example collapse construction.

#include <cstddef>
#include <optional>

#include "recon/model.hpp"

namespace recon {

struct UnderdeterminationReport {
  std::size_t n_equations = 0;              // L * N
  std::size_t n_unknowns = 0;               // N * K
  std::size_t kernel_dim_lower_bound = 0;   // N - rank(Xbar), when data given
  double residual = 0.0;                    // stationarity residual, when computable
};

// |Xbar^T grad L(Xbar theta*, Y)|_2 for the affine model; the gradient is the
// mean-loss derivative in the logits, no weight-decay term. Rejects
// non-affine specs.
double check_stationarity(const Dataset& data, const ParamVector& theta_star, const LossSpec& loss);

UnderdeterminationReport underdetermination_report(std::size_t n, std::size_t k, std::size_t l,
                                                   const Dataset* data = nullptr,
                                                   const ParamVector* theta_star = nullptr,
                                                   const LossSpec* loss = nullptr);

// Rows x_i = (y_i - b) w / |w|^2 (+ an optional offset projected onto
// ker(w^T), demonstrating non-uniqueness), so the augmented rows satisfy
// (x_i, 1) . (w, b) = y_i exactly. Mse-loss context.
Matrix construct_interpolating_inputs(const ParamVector& theta_star, const Vector& y,
                                      const Matrix* kernel_offset = nullptr);

// Dataset of n identical copies of x_seed labelled y_target. Requires the
// model to classify x_seed with margin y*z >= margin_min; verifies the
// resulting zero-decay penalty bound before returning.
Dataset construct_collapse(const Vector& x_seed, const ParamVector& theta_star, double y_target,
                           std::size_t n, double margin_min = 20.0);

// Affine helper: translate x along y*w until the classification margin reaches
// the target.
Vector push_to_margin(const ParamVector& theta_star, const Vector& x_seed, double y,
                      double target_margin);

}  // namespace recon
