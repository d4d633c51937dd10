#include <doctest.h>

#include <cmath>
#include <numeric>

#include "recon/rng.hpp"

using namespace recon;

TEST_SUITE("rng") {

TEST_CASE("identical (master_seed, stream_id) gives identical sequences") {
  RngStream a(123456789, 42), b(123456789, 42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c(123456789, 42), d(123456789, 42);
  for (int i = 0; i < 100; ++i) {
    CHECK(c.uniform01() == d.uniform01());
    CHECK(c.gaussian() == d.gaussian());
  }
}

TEST_CASE("distinct stream ids decorrelate") {
  RngStream a(7, 0), b(7, 1);
  int same = 0;
  for (int i = 0; i < 1000; ++i) same += a.next_u64() == b.next_u64();
  CHECK(same == 0);
}

TEST_CASE("uniform01 lies in [0,1) with mean near 1/2") {
  RngStream rng(99, 3);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("gaussian moments") {
  RngStream rng(5, 8);
  double s1 = 0.0, s2 = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    s1 += g;
    s2 += g * g;
  }
  CHECK(std::abs(s1 / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.03);
}

TEST_CASE("below is bounded and covers small ranges") {
  RngStream rng(17, 2);
  bool seen[5] = {};
  for (int i = 0; i < 500; ++i) {
    const auto v = rng.below(5);
    CHECK(v < 5);
    seen[v] = true;
  }
  for (bool s : seen) CHECK(s);
}

TEST_CASE("shuffle is a seeded permutation") {
  std::vector<std::size_t> v(20), w(20);
  std::iota(v.begin(), v.end(), 0);
  std::iota(w.begin(), w.end(), 0);
  RngStream a(3, 3), b(3, 3);
  a.shuffle_indices(v);
  b.shuffle_indices(w);
  CHECK(v == w);
  std::vector<std::size_t> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
}

TEST_CASE("stage stream ids differ by stage and index") {
  CHECK(stream_id_for("train") != stream_id_for("init"));
  CHECK(stream_id_for("sweep-cell", 0) != stream_id_for("sweep-cell", 1));
}

}  // TEST_SUITE
