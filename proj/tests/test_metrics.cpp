#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "recon/metrics.hpp"
#include "test_util.hpp"

using namespace recon;
using namespace recon::testutil;

TEST_SUITE("metrics") {

TEST_CASE("exact member of the reference set") {
  RngStream rng(1, 0);
  Matrix ref(10, 6);
  for (double& v : ref.flat()) v = rng.uniform01();
  const NNRecord r = nearest_neighbor(ref.row(7), ref);
  CHECK(r.nn_index == 7);
  CHECK(r.l2 == 0.0);
  CHECK(rank_of(ref.row(7), ref, 7) == 1);
}

TEST_CASE("two references at distances 1 and 2") {
  Matrix ref(2, 2, 0.0);
  ref(0, 0) = 1.0;  // distance 1 from origin
  ref(1, 0) = 2.0;  // distance 2
  const Vector q{0.0, 0.0};
  const NNRecord r = nearest_neighbor(q, ref);
  CHECK(r.nn_index == 0);
  CHECK(r.l2 == doctest::Approx(1.0));
  CHECK(rank_of(q, ref, 1) == 2);
}

TEST_CASE("matches a brute-force rescan with an independent code path") {
  RngStream rng(2, 0);
  Matrix ref(30, 8), queries(5, 8);
  for (double& v : ref.flat()) v = rng.uniform01();
  for (double& v : queries.flat()) v = rng.uniform01();
  const auto table = nn_table(queries, ref);
  for (const auto& rec : table) {
    // independent scan: sort all (distance, index) pairs
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < ref.rows(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < 8; ++c) {
        const double diff = queries(rec.recon_index, c) - ref(j, c);
        s += diff * diff;
      }
      all.push_back({std::sqrt(s), j});
    }
    std::sort(all.begin(), all.end());
    CHECK(rec.nn_index == all[0].second);
    CHECK(rec.l2 == doctest::Approx(all[0].first).epsilon(1e-12));
  }
}

TEST_CASE("permutation equivariance of the scan") {
  RngStream rng(3, 0);
  Matrix ref(12, 5);
  for (double& v : ref.flat()) v = rng.uniform01();
  Vector q(5);
  for (double& v : q) v = rng.uniform01();
  const NNRecord base = nearest_neighbor(q, ref);

  // reverse the rows: the winner moves to the mirrored index, same distance
  Matrix rev(12, 5);
  for (std::size_t i = 0; i < 12; ++i) {
    auto src = ref.row(11 - i);
    std::copy(src.begin(), src.end(), rev.row(i).begin());
  }
  const NNRecord mirr = nearest_neighbor(q, rev);
  CHECK(mirr.l2 == base.l2);
  CHECK(mirr.nn_index == 11 - base.nn_index);
}

TEST_CASE("theta_distance basics") {
  CHECK(theta_distance({1.0, 2.0}, {1.0, 2.0}) == 0.0);
  CHECK(theta_distance({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(2.0));
  CHECK_THROWS_AS((void)theta_distance({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("topk membership with planted distances") {
  // references at distances 1, 2, 3, 4 from the query
  Matrix ref(4, 1);
  for (std::size_t i = 0; i < 4; ++i) ref(i, 0) = static_cast<double>(i + 1);
  const Vector q{0.0};
  CHECK(rank_of(q, ref, 0) == 1);
  CHECK(rank_of(q, ref, 3) == 4);
  CHECK(topk_membership(q, ref, 1, 2));
  CHECK(!topk_membership(q, ref, 2, 2));
  CHECK(topk_membership(q, ref, 3, 4));  // k = set size is always true
  CHECK_THROWS_AS((void)topk_membership(q, ref, 9, 1), std::invalid_argument);
}

TEST_CASE("identical recon, k = 1") {
  Matrix ref(3, 2);
  ref(0, 0) = 5.0;
  ref(1, 1) = 1.0;
  ref(2, 0) = -2.0;
  CHECK(topk_membership(ref.row(1), ref, 1, 1));
}

TEST_CASE("ties break to the lowest index") {
  Matrix ref(3, 1);
  ref(0, 0) = 1.0;
  ref(1, 0) = -1.0;  // same distance from 0
  ref(2, 0) = 3.0;
  const Vector q{0.0};
  CHECK(nearest_neighbor(q, ref).nn_index == 0);
  CHECK(rank_of(q, ref, 1) == 2);
}

TEST_CASE("grid aggregation matches hand-computed averages") {
  // 2x2 grid, one-sample runs against singleton reference sets
  Matrix gt(1, 2), part(1, 2), rnd(1, 2);
  gt(0, 0) = 0.0; gt(0, 1) = 0.0;
  part(0, 0) = 1.0; part(0, 1) = 0.0;
  rnd(0, 0) = 0.0; rnd(0, 1) = 2.0;

  std::vector<GridRun> runs;
  for (double l1 : {0.0, 1.0}) {
    for (double l2 : {0.0, 1.0}) {
      Matrix x(1, 2);
      x(0, 0) = l1;
      x(0, 1) = l2;
      runs.push_back({{l1, l2}, x});
    }
  }
  const auto cells = grid_aggregate(runs, gt, part, rnd);
  REQUIRE(cells.size() == 4);
  // run (l1=0, l2=0): x = (0,0): d(gt)=0, d(part)=1, d(rnd)=2
  CHECK(cells[0].avg_l2_to_gt == doctest::Approx(0.0));
  CHECK(cells[0].avg_l2_to_partition == doctest::Approx(1.0));
  CHECK(cells[0].avg_l2_to_random == doctest::Approx(2.0));
  // run (l1=1, l2=1): x = (1,1): d(gt)=sqrt(2), d(part)=1, d(rnd)=sqrt(2)
  CHECK(cells[3].avg_l2_to_gt == doctest::Approx(std::sqrt(2.0)));
  CHECK(cells[3].avg_l2_to_partition == doctest::Approx(1.0));
  CHECK(cells[3].avg_l2_to_random == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("reconstructions identical to the reference set average to zero") {
  RngStream rng(4, 0);
  Matrix gt(5, 4);
  for (double& v : gt.flat()) v = rng.uniform01();
  CHECK(mean_nn_l2(gt, gt) == 0.0);
  // and any perturbation makes it strictly positive
  Matrix moved = gt;
  moved(0, 0) += 0.5;
  CHECK(mean_nn_l2(moved, gt) > 0.0);
}

TEST_CASE("dimension mismatches are rejected") {
  Matrix ref(2, 3, 0.0);
  CHECK_THROWS_AS((void)nearest_neighbor(Vector{1.0, 2.0}, ref), std::invalid_argument);
  CHECK_THROWS_AS((void)nearest_neighbor(Vector{1.0, 2.0, 3.0}, Matrix()), std::invalid_argument);
}

}  // TEST_SUITE
