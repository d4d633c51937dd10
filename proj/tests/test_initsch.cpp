#include <doctest.h>

#include <cmath>

#include "recon/init_schemes.hpp"
#include "test_util.hpp"

using namespace recon;
using namespace recon::testutil;

namespace {

InitSources make_sources(std::size_t n, std::size_t k, std::size_t pool, std::uint64_t seed) {
  RngStream rng(seed, 0);
  InitSources s;
  s.ground_truth = Matrix(n, k);
  for (double& v : s.ground_truth.flat()) v = rng.uniform01();
  s.partition_pool = Matrix(pool, k);
  for (double& v : s.partition_pool.flat()) v = rng.uniform01();
  return s;
}

}  // namespace

TEST_SUITE("init_schemes") {

TEST_CASE("ground truth init is an exact copy") {
  const auto src = make_sources(4, 6, 8, 1);
  RngStream rng(2, 0);
  InitScheme s;
  s.kind = InitKind::GroundTruth;
  const InitResult r = make_init(s, 4, 6, &src, rng);
  for (std::size_t i = 0; i < r.x0.size(); ++i) {
    CHECK(r.x0.data()[i] == src.ground_truth.data()[i]);
  }
}

TEST_CASE("uniform init is reproducible with mean near 1/2") {
  InitScheme s;  // Uniform01
  RngStream a(3, 7), b(3, 7);
  const InitResult ra = make_init(s, 100, 100, nullptr, a);
  const InitResult rb = make_init(s, 100, 100, nullptr, b);
  CHECK(ra.x0.flat().size() == 10000);
  double mean = 0.0;
  for (std::size_t i = 0; i < ra.x0.size(); ++i) {
    CHECK(ra.x0.data()[i] == rb.x0.data()[i]);
    mean += ra.x0.data()[i];
  }
  mean /= static_cast<double>(ra.x0.size());
  CHECK(mean >= 0.45);
  CHECK(mean <= 0.55);
}

TEST_CASE("gaussian init scales with sigma") {
  InitScheme s;
  s.kind = InitKind::Gaussian;
  s.sigma = 3.0;
  RngStream rng(4, 0);
  const InitResult r = make_init(s, 50, 50, nullptr, rng);
  double ss = 0.0;
  for (double v : r.x0.flat()) ss += v * v;
  const double std_est = std::sqrt(ss / static_cast<double>(r.x0.size()));
  CHECK(std_est > 2.5);
  CHECK(std_est < 3.5);
}

TEST_CASE("partition init draws distinct pool rows, disjoint from ground truth") {
  const auto src = make_sources(4, 6, 10, 5);
  RngStream rng(6, 0);
  InitScheme s;
  s.kind = InitKind::Partition;
  const InitResult r = make_init(s, 4, 6, &src, rng);
  REQUIRE(r.partition_rows.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) CHECK(r.partition_rows[i] != r.partition_rows[j]);
    // row content equals the pool row it names
    for (std::size_t c = 0; c < 6; ++c) {
      CHECK(r.x0(i, c) == src.partition_pool(r.partition_rows[i], c));
    }
    // exact row-equality check against every ground-truth row
    for (std::size_t g = 0; g < 4; ++g) {
      bool equal = true;
      for (std::size_t c = 0; c < 6; ++c) equal = equal && r.x0(i, c) == src.ground_truth(g, c);
      CHECK(!equal);
    }
  }
}

TEST_CASE("partition pool smaller than n is rejected") {
  const auto src = make_sources(4, 6, 3, 7);
  RngStream rng(8, 0);
  InitScheme s;
  s.kind = InitKind::Partition;
  CHECK_THROWS_AS((void)make_init(s, 4, 6, &src, rng), std::invalid_argument);
}

TEST_CASE("missing sources are rejected") {
  RngStream rng(9, 0);
  InitScheme s;
  s.kind = InitKind::GroundTruth;
  CHECK_THROWS_AS((void)make_init(s, 2, 2, nullptr, rng), std::invalid_argument);
}

TEST_CASE("mix endpoints reproduce the formula") {
  const auto src = make_sources(3, 5, 6, 10);
  RngStream rng(11, 0);
  Matrix part(3, 5), rnd(3, 5);
  for (double& v : part.flat()) v = rng.uniform01();
  for (double& v : rnd.flat()) v = rng.uniform01();

  const Matrix at11 = mix_init({1.0, 1.0}, src.ground_truth, part, rnd);
  for (std::size_t i = 0; i < at11.size(); ++i) CHECK(at11.data()[i] == src.ground_truth.data()[i]);

  for (double l1 : {0.0, 0.25, 0.75, 1.0}) {
    const Matrix at_l20 = mix_init({l1, 0.0}, src.ground_truth, part, rnd);
    for (std::size_t i = 0; i < at_l20.size(); ++i) CHECK(at_l20.data()[i] == rnd.data()[i]);
  }

  const Matrix at01 = mix_init({0.0, 1.0}, src.ground_truth, part, rnd);
  for (std::size_t i = 0; i < at01.size(); ++i) CHECK(at01.data()[i] == part.data()[i]);
}

TEST_CASE("mix is linear in each source (superposition)") {
  RngStream rng(12, 0);
  const MixScheme m{0.37, 0.81};
  Matrix gt1(2, 3), gt2(2, 3), part(2, 3), rnd(2, 3);
  for (double& v : gt1.flat()) v = rng.uniform01();
  for (double& v : gt2.flat()) v = rng.uniform01();
  for (double& v : part.flat()) v = rng.uniform01();
  for (double& v : rnd.flat()) v = rng.uniform01();

  const double a = 0.6, b = 0.4;
  Matrix gt_comb(2, 3);
  for (std::size_t i = 0; i < gt_comb.size(); ++i) {
    gt_comb.data()[i] = a * gt1.data()[i] + b * gt2.data()[i];
  }
  const Matrix lhs = mix_init(m, gt_comb, part, rnd);
  const Matrix r1 = mix_init(m, gt1, part, rnd);
  const Matrix r2 = mix_init(m, gt2, part, rnd);
  const Matrix r0 = mix_init(m, Matrix(2, 3, 0.0), part, rnd);
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const double rhs = a * r1.data()[i] + b * r2.data()[i] + (1.0 - a - b) * r0.data()[i];
    CHECK(lhs.data()[i] == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("lambda grid sizes") {
  const double five[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  CHECK(lambda_grid(five).size() == 25);
  const double one[] = {1.0};
  CHECK(lambda_grid(one).size() == 1);
  const double two[] = {0.0, 1.0};
  const auto g = lambda_grid(two);
  CHECK(g.size() == 4);
  CHECK(g[0].lambda1 == 0.0);
  CHECK(g[0].lambda2 == 0.0);
  CHECK(g[3].lambda1 == 1.0);
  CHECK(g[3].lambda2 == 1.0);
}

TEST_CASE("out-of-range lambdas are rejected") {
  const auto src = make_sources(2, 2, 4, 13);
  Matrix part(2, 2, 0.0), rnd(2, 2, 0.0);
  CHECK_THROWS_AS((void)mix_init({1.5, 0.0}, src.ground_truth, part, rnd), std::invalid_argument);
}

}  // TEST_SUITE
