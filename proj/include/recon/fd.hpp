#pragma once

// Central-difference oracles. Every analytic derivative in the library is
// validated against these in the test suites.

#include <cmath>
#include <functional>

#include "recon/errors.hpp"
#include "recon/linalg.hpp"

namespace recon {

// Default step: 1e-5 * (1 + |x|_inf), balancing truncation and roundoff
// at float64.
inline double default_fd_step(std::span<const double> x) {
  return 1e-5 * (1.0 + norm_inf(x));
}

// (f(x + h e_i) - f(x - h e_i)) / (2h) per coordinate.
inline Vector fd_grad(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  require(h > 0.0, "fd_grad: step must be positive");
  Vector g(x.size());
  Vector xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericError("fd_grad: non-finite function evaluation");
    }
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// (g(theta + h v) - g(theta - h v)) / (2h), a directional derivative of a
// vector field; with g = grad of a scalar this is a Hessian-vector product.
inline Vector fd_hvp(const std::function<Vector(const Vector&)>& g, const Vector& theta,
                     const Vector& v, double h) {
  require(h > 0.0, "fd_hvp: step must be positive");
  require(theta.size() == v.size(), "fd_hvp: length mismatch");
  Vector tp = theta, tm = theta;
  axpy(h, v, tp);
  axpy(-h, v, tm);
  const Vector gp = g(tp);
  const Vector gm = g(tm);
  require(gp.size() == theta.size() && gm.size() == theta.size(), "fd_hvp: field dimension mismatch");
  Vector out(theta.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(gp[i]) || !std::isfinite(gm[i])) {
      throw NumericError("fd_hvp: non-finite field evaluation");
    }
    out[i] = (gp[i] - gm[i]) / (2.0 * h);
  }
  return out;
}

}  // namespace recon
