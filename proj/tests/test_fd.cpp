#include <doctest.h>

#include <cmath>

#include "recon/errors.hpp"
#include "recon/fd.hpp"

using namespace recon;

TEST_SUITE("fd") {

TEST_CASE("fd_grad on a quadratic is exact up to roundoff") {
  auto f = [](const Vector& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); };
  const Vector g = fd_grad(f, {1.0, 2.0}, 1e-5);
  CHECK(std::abs(g[0] - 1.0) < 1e-8);
  CHECK(std::abs(g[1] - 2.0) < 1e-8);
}

TEST_CASE("fd_grad of a constant is zero") {
  auto f = [](const Vector&) { return 3.25; };
  for (double v : fd_grad(f, Vector(4, 0.7), 1e-5)) CHECK(v == 0.0);
}

TEST_CASE("fd_grad rejects non-finite evaluations") {
  auto f = [](const Vector& x) { return 1.0 / x[0]; };
  CHECK_THROWS_AS((void)fd_grad(f, {0.0}, 1e-5), NumericError);
}

TEST_CASE("fd_hvp on a linear field reproduces the matrix exactly") {
  // g(t) = A t with A symmetric: fd_hvp returns A v up to roundoff
  auto g = [](const Vector& t) {
    return Vector{2.0 * t[0] + 1.0 * t[1], 1.0 * t[0] + 3.0 * t[1]};
  };
  const Vector got = fd_hvp(g, {0.3, -0.2}, {1.0, 1.0}, 1e-6);
  CHECK(std::abs(got[0] - 3.0) < 1e-8);
  CHECK(std::abs(got[1] - 4.0) < 1e-8);
}

TEST_CASE("fd_hvp with v = 0 is zero") {
  auto g = [](const Vector& t) { return Vector{std::sin(t[0]), std::cos(t[1])}; };
  for (double v : fd_hvp(g, {0.1, 0.2}, {0.0, 0.0}, 1e-5)) CHECK(v == 0.0);
}

TEST_CASE("default step scales with the iterate") {
  const Vector small(3, 0.0);
  const Vector big(3, 100.0);
  CHECK(default_fd_step(small) == doctest::Approx(1e-5));
  CHECK(default_fd_step(big) == doctest::Approx(1e-5 * 101.0));
}

}  // TEST_SUITE
