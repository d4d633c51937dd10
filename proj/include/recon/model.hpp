#pragma once

// Classifier architectures, training losses, and their derivative stack:
// analytic gradients in theta and x, exact Hessian-vector products, and the
// mixed second derivative that the reconstruction attacks are built on.
// Everything is batched dense linear algebra on the kernels in linalg.hpp.

#include <cstdint>
#include <span>
#include <vector>

#include "recon/linalg.hpp"

namespace recon {

enum class Arch { Affine, OneHidden, Mlp };
enum class Activation { Relu, Softplus };

struct ModelSpec {
  Arch arch = Arch::Affine;
  std::size_t input_dim = 0;                // K
  std::size_t hidden_dim = 0;               // OneHidden width
  std::vector<std::size_t> hidden_widths;   // Mlp widths, input/output excluded
  Activation activation = Activation::Relu;
  double softplus_beta = 20.0;

  static ModelSpec affine(std::size_t k);
  static ModelSpec one_hidden(std::size_t k, std::size_t h, Activation act, double beta = 20.0);
  static ModelSpec mlp(std::size_t k, std::vector<std::size_t> hidden, Activation act, double beta = 20.0);

  // layer widths including input and the scalar output: [K, ..., 1]
  std::vector<std::size_t> widths() const;
  std::size_t layer_count() const { return widths().size() - 1; }
  std::size_t param_count() const;
  // true when the energy is twice continuously differentiable in theta
  bool smooth() const { return arch == Arch::Affine || activation == Activation::Softplus; }
  void validate() const;
};

bool operator==(const ModelSpec& a, const ModelSpec& b);

// Flat parameter storage with per-layer views. Layout is
// [W1 (d1 x d0, row-major), b1, W2, b2, ...]; the spans alias `flat`, so
// writing through a view updates the flat vector.
class ParamVector {
 public:
  explicit ParamVector(const ModelSpec& spec);
  ParamVector(const ModelSpec& spec, Vector flat_values);

  const ModelSpec& spec() const { return spec_; }
  std::size_t size() const { return flat.size(); }

  std::span<double> weight(std::size_t layer);
  std::span<const double> weight(std::size_t layer) const;
  std::span<double> bias(std::size_t layer);
  std::span<const double> bias(std::size_t layer) const;

  std::size_t weight_rows(std::size_t layer) const { return widths_[layer + 1]; }
  std::size_t weight_cols(std::size_t layer) const { return widths_[layer]; }

  Vector flat;

 private:
  ModelSpec spec_;
  std::vector<std::size_t> widths_;
  std::vector<std::size_t> w_off_, b_off_;
};

enum class LossKind { Logistic, Mse };

struct LossSpec {
  LossKind kind = LossKind::Logistic;
  double weight_decay = 0.0;  // rho; (rho/2)|theta|^2 is added to the energy
};

// per-sample loss and its derivatives in the logit z; labels are +-1,
// logistic is ln(1 + exp(-y z)) evaluated overflow-free
double loss_value(LossKind kind, double z, double y);
double loss_dz(LossKind kind, double z, double y);
double loss_dzz(LossKind kind, double z, double y);

struct Dataset {
  Matrix inputs;  // N x K
  Vector labels;  // +-1
  std::size_t n() const { return inputs.rows(); }
  std::size_t k() const { return inputs.cols(); }
  // inputs with a constant 1 column appended (the bias-augmented view)
  Matrix augmented() const;
  void validate() const;
};

// ---- operations --------------------------------------------------------

// logits, one per dataset row
Vector forward(const ParamVector& theta, const Matrix& x);

// mean per-sample loss + (rho/2)|theta|^2; throws NumericError when any
// intermediate overflows to non-finite
double energy(const ParamVector& theta, const Dataset& data, const LossSpec& loss);

// dE/dtheta, length param_count
Vector grad_theta(const ParamVector& theta, const Dataset& data, const LossSpec& loss);

// fused single-pass energy + theta gradient; the descent loops live on this
double energy_and_grad_theta(const ParamVector& theta, const Dataset& data, const LossSpec& loss,
                             Vector& grad);

// dE/dx, N x K
Matrix grad_x(const ParamVector& theta, const Dataset& data, const LossSpec& loss);

// (d^2E/dtheta^2) v, exact both-term Hessian product via tangent propagation
Vector hvp_theta(const ParamVector& theta, const Dataset& data, const LossSpec& loss, const Vector& v);

// d/dx <dE/dtheta, p> with p held constant, N x K
Matrix mixed_vjp(const ParamVector& theta, const Dataset& data, const LossSpec& loss, const Vector& p);

// (d^2E/dtheta dx) applied to an x-direction; adjoint of mixed_vjp, used by
// the test-side operator-norm estimates
Vector mixed_jvp(const ParamVector& theta, const Dataset& data, const LossSpec& loss, const Matrix& dx);

}  // namespace recon
