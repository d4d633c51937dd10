#include <doctest.h>

#include <cmath>

#include "recon/fd.hpp"
#include "recon/gradpen.hpp"
#include "recon/linear_analysis.hpp"
#include "recon/trainer.hpp"
#include "test_util.hpp"

using namespace recon;
using namespace recon::testutil;

TEST_SUITE("gradpen") {

TEST_CASE("penalty at the training data is the squared trainer tolerance") {
  const std::size_t k = 10, n = 6;
  const Dataset d = random_dataset(n, k, 61);
  const LossSpec loss{LossKind::Logistic, 1e-3};
  TrainConfig cfg;
  cfg.lr = 0.5;
  cfg.seed = 2;
  cfg.grad_tol = 1e-8;
  const TrainReport rep = train(ModelSpec::affine(k), d, loss, cfg);
  REQUIRE(rep.converged);
  CHECK(penalty(rep.theta_star, d, loss) <= cfg.grad_tol * cfg.grad_tol);
}

TEST_CASE("penalty on a collapse dataset is numerically zero") {
  const std::size_t k = 12;
  const ModelSpec spec = ModelSpec::affine(k);
  ParamVector theta(spec);
  RngStream rng(62, 0);
  for (double& v : theta.flat) v = rng.uniform(-1, 1);
  Vector seed(k, 0.3);
  seed = push_to_margin(theta, seed, 1.0, 25.0);
  const Dataset collapsed = construct_collapse(seed, theta, 1.0, 6);
  CHECK(penalty(theta, collapsed, {LossKind::Logistic, 0.0}) <= 1e-12);
}

TEST_CASE("penalty matches an independent recomputation on random inputs") {
  for (int i = 0; i < 10; ++i) {
    const Instance inst = random_instance(6300 + i);
    const Vector g = grad_theta(inst.theta, inst.data, inst.loss);
    double want = 0.0;
    for (double v : g) want += v * v;
    CHECK(penalty(inst.theta, inst.data, inst.loss) == doctest::Approx(want).epsilon(1e-12));
    CHECK(penalty(inst.theta, inst.data, inst.loss) >= 0.0);
  }
}

TEST_CASE("penalty gradient agrees with finite differences on 100+ smooth instances") {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Instance inst = random_instance(6400 + i);
    auto f = [&](const Vector& xf) {
      Dataset d2 = inst.data;
      std::copy(xf.begin(), xf.end(), d2.inputs.flat().begin());
      return penalty(inst.theta, d2, inst.loss);
    };
    const Vector xflat = flat_of(inst.data.inputs);
    worst = std::max(worst, rel_err(penalty_grad_x(inst.theta, inst.data, inst.loss),
                                    fd_grad(f, xflat, default_fd_step(xflat))));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("training data is a fixed point of the descent") {
  const std::size_t k = 10, n = 5;
  const Dataset d = random_dataset(n, k, 63);
  const LossSpec loss{LossKind::Logistic, 1e-3};
  TrainConfig cfg;
  cfg.lr = 0.5;
  cfg.seed = 4;
  cfg.grad_tol = 1e-10;
  const TrainReport rep = train(ModelSpec::affine(k), d, loss, cfg);
  REQUIRE(rep.converged);

  // gradient of the penalty at GT is bounded by the trainer tolerance scale
  const Matrix g = penalty_grad_x(rep.theta_star, d, loss);
  CHECK(frob_norm(g) <= 1e-6);

  GradPenConfig gp;
  gp.iters = 50;
  const ReconResult res = reconstruct_gradpen(rep.theta_star, d.labels, d.inputs, loss, gp);
  double dx = 0.0;
  for (std::size_t i = 0; i < res.x_rec.size(); ++i) {
    dx = std::max(dx, std::abs(res.x_rec.data()[i] - d.inputs.data()[i]));
  }
  CHECK(dx <= 1e-6);
}

TEST_CASE("penalty trace never increases and ReLU is admitted") {
  const std::size_t k = 8, n = 4;
  const Dataset d = random_dataset(n, k, 64);
  const ModelSpec spec = ModelSpec::one_hidden(k, 6, Activation::Relu);
  const LossSpec loss{LossKind::Logistic, 1e-4};
  TrainConfig cfg;
  cfg.lr = 0.05;
  cfg.momentum = 0.95;
  cfg.seed = 5;
  cfg.grad_tol = 1e-6;
  cfg.theta_init = ThetaInit::Gaussian;
  cfg.init_sigma = 0.3;
  const TrainReport rep = train(spec, d, loss, cfg);
  REQUIRE(rep.converged);

  RngStream rng(65, 0);
  Matrix x0(n, k);
  for (double& v : x0.flat()) v = rng.uniform01();
  GradPenConfig gp;
  gp.iters = 400;
  const ReconResult res = reconstruct_gradpen(rep.theta_star, d.labels, x0, loss, gp);
  REQUIRE(res.trace.size() >= 2);
  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    CHECK(res.trace[i].objective <= res.trace[i - 1].objective);
  }
  CHECK(res.trace.back().objective <= res.trace.front().objective);
  CHECK(res.trace.back().objective < res.trace.front().objective);  // made progress
}

TEST_CASE("zero-penalty manifold is reachable without training data") {
  // the §-collapse argument in executable form: a dataset far from every
  // training row drives the penalty to numerical zero
  const std::size_t k = 16, n = 6;
  const Dataset d = random_dataset(n, k, 66);
  const LossSpec loss{LossKind::Logistic, 1e-3};
  TrainConfig cfg;
  cfg.lr = 0.5;
  cfg.seed = 6;
  const TrainReport rep = train(ModelSpec::affine(k), d, loss, cfg);
  REQUIRE(rep.converged);

  Vector seed(k, 0.5);
  seed = push_to_margin(rep.theta_star, seed, 1.0, 30.0);
  const Dataset collapsed = construct_collapse(seed, rep.theta_star, 1.0, n);
  CHECK(penalty(rep.theta_star, collapsed, {LossKind::Logistic, 0.0}) <= 1e-12);
  for (std::size_t i = 0; i < collapsed.n(); ++i) {
    for (std::size_t j = 0; j < d.n(); ++j) {
      const Vector diff = vec_sub(Vector(collapsed.inputs.row(i).begin(), collapsed.inputs.row(i).end()),
                                  Vector(d.inputs.row(j).begin(), d.inputs.row(j).end()));
      CHECK(nrm2(diff) >= 0.1 * std::sqrt(static_cast<double>(k)));
    }
  }
}

TEST_CASE("partition init reconstructs the initialization, not the data") {
  const std::size_t k = 24, n_all = 12;
  Dataset all = random_dataset(n_all, k, 67);
  // split by halves: train on the first 6, init from the last 6
  Dataset train_set, holdout;
  train_set.inputs = Matrix(6, k);
  holdout.inputs = Matrix(6, k);
  for (std::size_t i = 0; i < 6; ++i) {
    std::copy(all.inputs.row(i).begin(), all.inputs.row(i).end(), train_set.inputs.row(i).begin());
    std::copy(all.inputs.row(i + 6).begin(), all.inputs.row(i + 6).end(), holdout.inputs.row(i).begin());
  }
  train_set.labels = {1.0, 1.0, 1.0, -1.0, -1.0, -1.0};
  holdout.labels = train_set.labels;

  const LossSpec loss{LossKind::Logistic, 1e-3};
  TrainConfig cfg;
  cfg.lr = 0.5;
  cfg.seed = 7;
  const TrainReport rep = train(ModelSpec::affine(k), train_set, loss, cfg);
  REQUIRE(rep.converged);

  GradPenConfig gp;
  gp.iters = 2000;
  const ReconResult res = reconstruct_gradpen(rep.theta_star, train_set.labels, holdout.inputs, loss, gp);
  std::size_t closer_to_init = 0;
  for (std::size_t i = 0; i < res.x_rec.size() / k; ++i) {
    Vector rec(res.x_rec.row(i).begin(), res.x_rec.row(i).end());
    Vector init(holdout.inputs.row(i).begin(), holdout.inputs.row(i).end());
    const double d_init = nrm2(vec_sub(rec, init));
    double d_train = 1e300;
    for (std::size_t j = 0; j < train_set.n(); ++j) {
      Vector tr(train_set.inputs.row(j).begin(), train_set.inputs.row(j).end());
      d_train = std::min(d_train, nrm2(vec_sub(rec, tr)));
    }
    if (d_init < d_train) ++closer_to_init;
  }
  CHECK(closer_to_init >= 5);  // at least 5 of 6 stay with their init
}

}  // TEST_SUITE
