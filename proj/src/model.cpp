#include "recon/model.hpp"

#include <cmath>
#include <limits>

#include "recon/errors.hpp"

namespace recon {

// ---- ModelSpec ----------------------------------------------------------

ModelSpec ModelSpec::affine(std::size_t k) {
  ModelSpec s;
  s.arch = Arch::Affine;
  s.input_dim = k;
  s.validate();
  return s;
}

ModelSpec ModelSpec::one_hidden(std::size_t k, std::size_t h, Activation act, double beta) {
  ModelSpec s;
  s.arch = Arch::OneHidden;
  s.input_dim = k;
  s.hidden_dim = h;
  s.activation = act;
  s.softplus_beta = beta;
  s.validate();
  return s;
}

ModelSpec ModelSpec::mlp(std::size_t k, std::vector<std::size_t> hidden, Activation act, double beta) {
  ModelSpec s;
  s.arch = Arch::Mlp;
  s.input_dim = k;
  s.hidden_widths = std::move(hidden);
  s.activation = act;
  s.softplus_beta = beta;
  s.validate();
  return s;
}

std::vector<std::size_t> ModelSpec::widths() const {
  std::vector<std::size_t> w{input_dim};
  if (arch == Arch::OneHidden) {
    w.push_back(hidden_dim);
  } else if (arch == Arch::Mlp) {
    w.insert(w.end(), hidden_widths.begin(), hidden_widths.end());
  }
  w.push_back(1);
  return w;
}

std::size_t ModelSpec::param_count() const {
  const auto w = widths();
  std::size_t p = 0;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) p += w[l + 1] * w[l] + w[l + 1];
  return p;
}

void ModelSpec::validate() const {
  require(input_dim > 0, "ModelSpec: input_dim must be positive");
  if (arch == Arch::OneHidden) require(hidden_dim > 0, "ModelSpec: hidden_dim must be positive");
  if (arch == Arch::Mlp) {
    require(!hidden_widths.empty(), "ModelSpec: Mlp needs at least one hidden layer");
    for (auto h : hidden_widths) require(h > 0, "ModelSpec: layer widths must be positive");
  }
  if (activation == Activation::Softplus) {
    require(softplus_beta > 0.0, "ModelSpec: softplus beta must be positive");
  }
}

bool operator==(const ModelSpec& a, const ModelSpec& b) {
  return a.arch == b.arch && a.input_dim == b.input_dim && a.hidden_dim == b.hidden_dim &&
         a.hidden_widths == b.hidden_widths && a.activation == b.activation &&
         a.softplus_beta == b.softplus_beta;
}

// ---- ParamVector --------------------------------------------------------

ParamVector::ParamVector(const ModelSpec& spec) : spec_(spec), widths_(spec.widths()) {
  spec_.validate();
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    w_off_.push_back(off);
    off += widths_[l + 1] * widths_[l];
    b_off_.push_back(off);
    off += widths_[l + 1];
  }
  flat.assign(off, 0.0);
}

ParamVector::ParamVector(const ModelSpec& spec, Vector flat_values) : ParamVector(spec) {
  require(flat_values.size() == flat.size(), "ParamVector: flat length does not match spec");
  flat = std::move(flat_values);
}

std::span<double> ParamVector::weight(std::size_t layer) {
  return {flat.data() + w_off_[layer], widths_[layer + 1] * widths_[layer]};
}
std::span<const double> ParamVector::weight(std::size_t layer) const {
  return {flat.data() + w_off_[layer], widths_[layer + 1] * widths_[layer]};
}
std::span<double> ParamVector::bias(std::size_t layer) {
  return {flat.data() + b_off_[layer], widths_[layer + 1]};
}
std::span<const double> ParamVector::bias(std::size_t layer) const {
  return {flat.data() + b_off_[layer], widths_[layer + 1]};
}

// ---- losses -------------------------------------------------------------

namespace {

// ln(1 + e^u) without overflow
double softplus_raw(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

double loss_value(LossKind kind, double z, double y) {
  if (kind == LossKind::Mse) {
    const double r = z - y;
    return 0.5 * r * r;
  }
  return softplus_raw(-y * z);
}

double loss_dz(LossKind kind, double z, double y) {
  if (kind == LossKind::Mse) return z - y;
  return -y * sigmoid(-y * z);
}

double loss_dzz(LossKind kind, double z, double y) {
  if (kind == LossKind::Mse) return 1.0;
  const double t = y * z;
  return sigmoid(t) * sigmoid(-t);
}

// ---- Dataset -------------------------------------------------------------

Matrix Dataset::augmented() const {
  Matrix out(n(), k() + 1);
  for (std::size_t i = 0; i < n(); ++i) {
    auto src = inputs.row(i);
    auto dst = out.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
    dst[k()] = 1.0;
  }
  return out;
}

void Dataset::validate() const {
  require(inputs.rows() == labels.size(), "Dataset: label count does not match rows");
  for (double y : labels) require(y == 1.0 || y == -1.0, "Dataset: labels must be +-1");
}

// ---- the engine -----------------------------------------------------------
//
// One batched forward/backward pass computes the logits and, on demand, the
// theta gradient and the x gradient. A tangent (forward-over-reverse) pass
// alongside it yields directional derivatives of both gradients, which is
// exactly what hvp_theta (theta direction), mixed_vjp (theta direction,
// x-gradient tangent) and mixed_jvp (x direction, theta-gradient tangent)
// need. Per-sample work is expressed as gemms so the OpenMP kernels carry
// the parallelism.

namespace {

struct ActTable {
  Activation act;
  double beta;
  double value(double t) const {
    if (act == Activation::Relu) return t > 0.0 ? t : 0.0;
    return softplus_raw(beta * t) / beta;
  }
  double deriv(double t) const {
    if (act == Activation::Relu) return t > 0.0 ? 1.0 : 0.0;
    return sigmoid(beta * t);
  }
  double second(double t) const {
    if (act == Activation::Relu) return 0.0;  // a.e.; subgradient semantics
    const double s = sigmoid(beta * t);
    return beta * s * (1.0 - s);
  }
};

void check_args(const ParamVector& theta, const Dataset& data) {
  require(data.k() == theta.spec().input_dim, "model: dataset width does not match spec input_dim");
  require(data.n() > 0, "model: dataset is empty");
}

struct Pass {
  const ParamVector& theta;
  const Matrix& x;
  ActTable act;
  std::size_t layers;
  std::size_t n;
  std::vector<Matrix> a;   // a[0] = x, a[l] post-activation
  std::vector<Matrix> s;   // s[l] pre-activation, l >= 1
  std::vector<Matrix> at;  // tangents of a
  std::vector<Matrix> st;  // tangents of s
  bool tangent = false;

  Pass(const ParamVector& th, const Matrix& xin)
      : theta(th),
        x(xin),
        act{th.spec().activation, th.spec().softplus_beta},
        layers(th.spec().layer_count()),
        n(xin.rows()) {}

  // bias add: s_row += b for every row
  static void add_bias(Matrix& m, std::span<const double> b) {
    const std::size_t r = m.rows(), c = m.cols();
    par_for(r, r * c > kParGrain, [&](std::size_t i) {
      double* row = m.data() + i * c;
      for (std::size_t j = 0; j < c; ++j) row[j] += b[j];
    });
  }

  void forward() {
    a.assign(layers + 1, Matrix());
    s.assign(layers + 1, Matrix());
    a[0] = x;
    for (std::size_t l = 1; l <= layers; ++l) {
      const auto w = theta.weight(l - 1);
      const std::size_t dl = theta.weight_rows(l - 1);
      const std::size_t dk = theta.weight_cols(l - 1);
      Matrix sl(n, dl);
      gemm_nt(a[l - 1].data(), n, dk, w.data(), dl, sl.data());
      add_bias(sl, theta.bias(l - 1));
      s[l] = std::move(sl);
      if (l < layers) {
        Matrix al(n, dl);
        const double* sp = s[l].data();
        double* ap = al.data();
        const std::size_t sz = s[l].size();
        par_for(sz, sz > kParGrain, [&](std::size_t i) { ap[i] = act.value(sp[i]); });
        a[l] = std::move(al);
      } else {
        a[l] = s[l];
      }
    }
  }

  // theta_tan and/or x_tan may be null; missing directions are zero
  void forward_tangent(const ParamVector* theta_tan, const Matrix* x_tan) {
    tangent = true;
    at.assign(layers + 1, Matrix());
    st.assign(layers + 1, Matrix());
    at[0] = x_tan ? *x_tan : Matrix(n, theta.spec().input_dim, 0.0);
    for (std::size_t l = 1; l <= layers; ++l) {
      const std::size_t dl = theta.weight_rows(l - 1);
      const std::size_t dk = theta.weight_cols(l - 1);
      Matrix stl(n, dl);
      gemm_nt(at[l - 1].data(), n, dk, theta.weight(l - 1).data(), dl, stl.data());
      if (theta_tan) {
        Matrix tmp(n, dl);
        gemm_nt(a[l - 1].data(), n, dk, theta_tan->weight(l - 1).data(), dl, tmp.data());
        axpy(1.0, tmp.flat(), stl.flat());
        add_bias(stl, theta_tan->bias(l - 1));
      }
      st[l] = std::move(stl);
      if (l < layers) {
        Matrix atl(n, dl);
        const double* sp = s[l].data();
        const double* stp = st[l].data();
        double* ap = atl.data();
        const std::size_t sz = st[l].size();
        par_for(sz, sz > kParGrain, [&](std::size_t i) { ap[i] = act.deriv(sp[i]) * stp[i]; });
        at[l] = std::move(atl);
      } else {
        at[l] = st[l];
      }
    }
  }

  Vector logits() const {
    Vector z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = s[layers](i, 0);
    return z;
  }

  Vector logit_tangents() const {
    Vector z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = st[layers](i, 0);
    return z;
  }

  // Reverse pass. d_top holds the per-sample loss derivative in the logits,
  // dt_top its tangent (both N x 1, unscaled by 1/N). Outputs are written
  // into the requested ParamVector/Matrix targets.
  void backward(const Matrix& d_top, const Matrix* dt_top, const LossSpec& loss,
                const ParamVector* theta_tan, ParamVector* gtheta, Matrix* gx,
                ParamVector* gtheta_tan, Matrix* gx_tan) {
    const double invn = 1.0 / static_cast<double>(n);
    const double rho = loss.weight_decay;
    Matrix d = d_top;
    Matrix dt = dt_top ? *dt_top : Matrix();

    for (std::size_t l = layers; l >= 1; --l) {
      const std::size_t dl = theta.weight_rows(l - 1);
      const std::size_t dk = theta.weight_cols(l - 1);
      const auto w = theta.weight(l - 1);

      if (gtheta) {
        Matrix gw(dl, dk);
        gemm_tn(d.data(), n, dl, a[l - 1].data(), dk, gw.data());
        auto dst = gtheta->weight(l - 1);
        const auto wsrc = theta.weight(l - 1);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = invn * gw.data()[i] + rho * wsrc[i];
        const Vector bs = col_sums(d);
        auto bdst = gtheta->bias(l - 1);
        const auto bsrc = theta.bias(l - 1);
        for (std::size_t i = 0; i < bdst.size(); ++i) bdst[i] = invn * bs[i] + rho * bsrc[i];
      }

      if (gtheta_tan) {
        Matrix gw(dl, dk), gw2(dl, dk);
        gemm_tn(dt.data(), n, dl, a[l - 1].data(), dk, gw.data());
        gemm_tn(d.data(), n, dl, at[l - 1].data(), dk, gw2.data());
        auto dst = gtheta_tan->weight(l - 1);
        const double* wt = theta_tan ? theta_tan->weight(l - 1).data() : nullptr;
        for (std::size_t i = 0; i < dst.size(); ++i) {
          dst[i] = invn * (gw.data()[i] + gw2.data()[i]) + (wt ? rho * wt[i] : 0.0);
        }
        const Vector bs = col_sums(dt);
        auto bdst = gtheta_tan->bias(l - 1);
        const double* bt = theta_tan ? theta_tan->bias(l - 1).data() : nullptr;
        for (std::size_t i = 0; i < bdst.size(); ++i) bdst[i] = invn * bs[i] + (bt ? rho * bt[i] : 0.0);
      }

      // propagate to the previous layer (or to the inputs when l == 1)
      if (l == 1 && !gx && !gx_tan) break;
      Matrix u(n, dk);
      gemm_nn(d.data(), n, dl, w.data(), dk, u.data());
      Matrix ut;
      if (tangent) {
        ut = Matrix(n, dk);
        gemm_nn(dt.data(), n, dl, w.data(), dk, ut.data());
        if (theta_tan) {
          Matrix tmp(n, dk);
          gemm_nn(d.data(), n, dl, theta_tan->weight(l - 1).data(), dk, tmp.data());
          axpy(1.0, tmp.flat(), ut.flat());
        }
      }

      if (l == 1) {
        if (gx) {
          *gx = std::move(u);
          scale(gx->flat(), invn);
        }
        if (gx_tan) {
          *gx_tan = std::move(ut);
          scale(gx_tan->flat(), invn);
        }
        break;
      }

      Matrix dprev(n, dk);
      const double* sp = s[l - 1].data();
      const double* up = u.data();
      double* dp = dprev.data();
      const std::size_t sz = u.size();
      par_for(sz, sz > kParGrain, [&](std::size_t i) { dp[i] = up[i] * act.deriv(sp[i]); });

      if (tangent) {
        Matrix dtprev(n, dk);
        const double* utp = ut.data();
        const double* stp = st[l - 1].data();
        double* dtp = dtprev.data();
        par_for(sz, sz > kParGrain, [&](std::size_t i) {
          dtp[i] = utp[i] * act.deriv(sp[i]) + up[i] * act.second(sp[i]) * stp[i];
        });
        dt = std::move(dtprev);
      }
      d = std::move(dprev);
    }
  }
};

Matrix loss_dz_column(const Vector& z, const Vector& y, LossKind kind) {
  Matrix d(z.size(), 1);
  for (std::size_t i = 0; i < z.size(); ++i) d(i, 0) = loss_dz(kind, z[i], y[i]);
  return d;
}

}  // namespace

Vector forward(const ParamVector& theta, const Matrix& x) {
  require(x.cols() == theta.spec().input_dim, "forward: input width does not match spec");
  Pass pass(theta, x);
  pass.forward();
  return pass.logits();
}

double energy(const ParamVector& theta, const Dataset& data, const LossSpec& loss) {
  check_args(theta, data);
  const Vector z = forward(theta, data.inputs);
  // per-sample losses into a buffer, then one ordered sum: deterministic
  Vector per(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) per[i] = loss_value(loss.kind, z[i], data.labels[i]);
  double sum = 0.0;
  for (double v : per) sum += v;
  double e = sum / static_cast<double>(data.n());
  if (loss.weight_decay > 0.0) e += 0.5 * loss.weight_decay * dot(theta.flat, theta.flat);
  if (!std::isfinite(e)) throw NumericError("energy: non-finite value (overflow in forward or loss)");
  return e;
}

Vector grad_theta(const ParamVector& theta, const Dataset& data, const LossSpec& loss) {
  check_args(theta, data);
  Pass pass(theta, data.inputs);
  pass.forward();
  const Vector z = pass.logits();
  const Matrix d = loss_dz_column(z, data.labels, loss.kind);
  ParamVector g(theta.spec());
  pass.backward(d, nullptr, loss, nullptr, &g, nullptr, nullptr, nullptr);
  return std::move(g.flat);
}

double energy_and_grad_theta(const ParamVector& theta, const Dataset& data, const LossSpec& loss,
                             Vector& grad) {
  check_args(theta, data);
  Pass pass(theta, data.inputs);
  pass.forward();
  const Vector z = pass.logits();

  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += loss_value(loss.kind, z[i], data.labels[i]);
  double e = sum / static_cast<double>(data.n());
  if (loss.weight_decay > 0.0) e += 0.5 * loss.weight_decay * dot(theta.flat, theta.flat);
  if (!std::isfinite(e)) throw NumericError("energy: non-finite value (overflow in forward or loss)");

  const Matrix d = loss_dz_column(z, data.labels, loss.kind);
  ParamVector g(theta.spec());
  pass.backward(d, nullptr, loss, nullptr, &g, nullptr, nullptr, nullptr);
  grad = std::move(g.flat);
  return e;
}

Matrix grad_x(const ParamVector& theta, const Dataset& data, const LossSpec& loss) {
  check_args(theta, data);
  Pass pass(theta, data.inputs);
  pass.forward();
  const Vector z = pass.logits();
  const Matrix d = loss_dz_column(z, data.labels, loss.kind);
  Matrix gx;
  pass.backward(d, nullptr, loss, nullptr, nullptr, &gx, nullptr, nullptr);
  return gx;
}

Vector hvp_theta(const ParamVector& theta, const Dataset& data, const LossSpec& loss, const Vector& v) {
  check_args(theta, data);
  require(v.size() == theta.size(), "hvp_theta: direction length mismatch");
  ParamVector vt(theta.spec(), v);
  Pass pass(theta, data.inputs);
  pass.forward();
  pass.forward_tangent(&vt, nullptr);
  const Vector z = pass.logits();
  const Vector zt = pass.logit_tangents();
  const Matrix d = loss_dz_column(z, data.labels, loss.kind);
  Matrix dt(z.size(), 1);
  for (std::size_t i = 0; i < z.size(); ++i) dt(i, 0) = loss_dzz(loss.kind, z[i], data.labels[i]) * zt[i];
  ParamVector hv(theta.spec());
  pass.backward(d, &dt, loss, &vt, nullptr, nullptr, &hv, nullptr);
  return std::move(hv.flat);
}

Matrix mixed_vjp(const ParamVector& theta, const Dataset& data, const LossSpec& loss, const Vector& p) {
  check_args(theta, data);
  require(p.size() == theta.size(), "mixed_vjp: direction length mismatch");
  ParamVector pt(theta.spec(), p);
  Pass pass(theta, data.inputs);
  pass.forward();
  pass.forward_tangent(&pt, nullptr);
  const Vector z = pass.logits();
  const Vector zt = pass.logit_tangents();
  const Matrix d = loss_dz_column(z, data.labels, loss.kind);
  Matrix dt(z.size(), 1);
  for (std::size_t i = 0; i < z.size(); ++i) dt(i, 0) = loss_dzz(loss.kind, z[i], data.labels[i]) * zt[i];
  Matrix gx_tan;
  pass.backward(d, &dt, loss, &pt, nullptr, nullptr, nullptr, &gx_tan);
  return gx_tan;
}

Vector mixed_jvp(const ParamVector& theta, const Dataset& data, const LossSpec& loss, const Matrix& dx) {
  check_args(theta, data);
  require(dx.rows() == data.n() && dx.cols() == data.k(), "mixed_jvp: direction shape mismatch");
  Pass pass(theta, data.inputs);
  pass.forward();
  pass.forward_tangent(nullptr, &dx);
  const Vector z = pass.logits();
  const Vector zt = pass.logit_tangents();
  const Matrix d = loss_dz_column(z, data.labels, loss.kind);
  Matrix dt(z.size(), 1);
  for (std::size_t i = 0; i < z.size(); ++i) dt(i, 0) = loss_dzz(loss.kind, z[i], data.labels[i]) * zt[i];
  ParamVector out(theta.spec());
  pass.backward(d, &dt, loss, nullptr, nullptr, nullptr, &out, nullptr);
  return std::move(out.flat);
}

}  // namespace recon
