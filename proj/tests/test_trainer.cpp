#include <doctest.h>

#include <cmath>

#include "recon/errors.hpp"
#include "recon/trainer.hpp"
#include "test_util.hpp"

using namespace recon;
using namespace recon::testutil;

TEST_SUITE("trainer") {

TEST_CASE("Mse ridge training matches the normal-equations solution") {
  const std::size_t k = 6, n = 16;  // N > K
  const ModelSpec spec = ModelSpec::affine(k);
  const Dataset d = random_dataset(n, k, 21);
  const double rho = 0.05;
  TrainConfig cfg;
  cfg.lr = 0.1;
  cfg.grad_tol = 1e-10;
  cfg.seed = 4;
  const TrainReport rep = train(spec, d, {LossKind::Mse, rho}, cfg);
  REQUIRE(rep.converged);
  const Vector want = ridge_solution(d, rho);
  CHECK(rel_err(rep.theta_star.flat, want) < 1e-6);
}

TEST_CASE("single logistic sample trains to a correct confident classifier") {
  const ModelSpec spec = ModelSpec::affine(3);
  Matrix x(1, 3);
  x(0, 0) = 0.2; x(0, 1) = 0.8; x(0, 2) = 0.5;
  Dataset d{x, {1.0}};
  TrainConfig cfg;
  cfg.lr = 0.5;
  cfg.grad_tol = 1e-8;
  cfg.seed = 5;
  const LossSpec loss{LossKind::Logistic, 1e-4};
  const TrainReport rep = train(spec, d, loss, cfg);
  REQUIRE(rep.converged);
  CHECK(rep.final_grad_norm <= cfg.grad_tol);
  CHECK(forward(rep.theta_star, d.inputs)[0] > 0.0);  // classified correctly
}

TEST_CASE("training is bit-deterministic given (seed, data)") {
  const ModelSpec spec = ModelSpec::affine(8);
  const Dataset d = random_dataset(6, 8, 22);
  TrainConfig cfg;
  cfg.lr = 0.3;
  cfg.seed = 9;
  const LossSpec loss{LossKind::Logistic, 1e-3};
  const TrainReport a = train(spec, d, loss, cfg);
  const TrainReport b = train(spec, d, loss, cfg);
  CHECK(a.iters_used == b.iters_used);
  CHECK(a.theta_star.flat == b.theta_star.flat);
  CHECK(a.energy_trace == b.energy_trace);
}

TEST_CASE("final energy never exceeds the initial energy") {
  for (int i = 0; i < 5; ++i) {
    const Dataset d = random_dataset(5, 6, 30 + i);
    TrainConfig cfg;
    cfg.lr = 0.2;
    cfg.seed = 30 + i;
    cfg.max_iters = 3000;
    cfg.grad_tol = 1e-6;
    const TrainReport rep = train(ModelSpec::affine(6), d, {LossKind::Logistic, 1e-3}, cfg);
    REQUIRE(!rep.energy_trace.empty());
    CHECK(rep.energy_trace.back() <= rep.energy_trace.front());
  }
}

TEST_CASE("divergence aborts with a diagnostic") {
  const ModelSpec spec = ModelSpec::affine(4);
  const Dataset d = random_dataset(8, 4, 23);
  TrainConfig cfg;
  cfg.lr = 50.0;  // far beyond the stability limit for Mse
  cfg.seed = 6;
  CHECK_THROWS_AS((void)train(spec, d, {LossKind::Mse, 0.0}, cfg), NumericError);
}

TEST_CASE("budget exhaustion is flagged, not silently returned") {
  const ModelSpec spec = ModelSpec::affine(6);
  const Dataset d = random_dataset(6, 6, 24);
  TrainConfig cfg;
  cfg.lr = 0.01;
  cfg.max_iters = 5;
  cfg.seed = 7;
  const TrainReport rep = train(spec, d, {LossKind::Logistic, 1e-4}, cfg);
  CHECK(!rep.converged);
  CHECK(rep.iters_used == cfg.max_iters);
}

TEST_CASE("uniform and gaussian theta inits differ and are seeded") {
  const ModelSpec spec = ModelSpec::affine(10);
  const Dataset d = random_dataset(4, 10, 25);
  TrainConfig a;
  a.max_iters = 0;
  a.seed = 11;
  TrainConfig b = a;
  b.theta_init = ThetaInit::Gaussian;
  b.init_sigma = 0.5;
  const LossSpec loss{LossKind::Logistic, 0.0};
  const Vector ua = train(spec, d, loss, a).theta_star.flat;
  const Vector ub = train(spec, d, loss, b).theta_star.flat;
  CHECK(ua != ub);
  for (double v : ua) {
    CHECK(v >= 0.0);  // standard uniform draws
    CHECK(v < 1.0);
  }
  CHECK(train(spec, d, loss, a).theta_star.flat == ua);
}

}  // TEST_SUITE
