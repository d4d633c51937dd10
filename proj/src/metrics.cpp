#include "recon/metrics.hpp"

#include <cmath>

namespace recon {

namespace {

double row_dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

NNRecord nearest_neighbor(std::span<const double> query, const Matrix& refset) {
  require(refset.rows() > 0, "nearest_neighbor: reference set is empty");
  require(refset.cols() == query.size(), "nearest_neighbor: dimension mismatch");
  NNRecord best{0, 0, row_dist2(query, refset.row(0))};
  for (std::size_t j = 1; j < refset.rows(); ++j) {
    const double d = row_dist2(query, refset.row(j));
    if (d < best.l2) {
      best.nn_index = j;
      best.l2 = d;
    }
  }
  best.l2 = std::sqrt(best.l2);
  return best;
}

std::vector<NNRecord> nn_table(const Matrix& recons, const Matrix& refset) {
  std::vector<NNRecord> out(recons.rows());
#pragma omp parallel for schedule(static) if (recons.rows() * refset.rows() * refset.cols() > 16384)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(recons.rows()); ++i) {
    out[i] = nearest_neighbor(recons.row(i), refset);
    out[i].recon_index = static_cast<std::size_t>(i);
  }
  return out;
}

std::size_t rank_of(std::span<const double> query, const Matrix& refset, std::size_t ref_index) {
  require(ref_index < refset.rows(), "rank_of: reference index out of bounds");
  require(refset.cols() == query.size(), "rank_of: dimension mismatch");
  const double d_ref = row_dist2(query, refset.row(ref_index));
  std::size_t rank = 1;
  for (std::size_t j = 0; j < refset.rows(); ++j) {
    if (j == ref_index) continue;
    const double d = row_dist2(query, refset.row(j));
    if (d < d_ref || (d == d_ref && j < ref_index)) ++rank;
  }
  return rank;
}

bool topk_membership(std::span<const double> query, const Matrix& refset, std::size_t ref_index,
                     std::size_t k) {
  require(k >= 1, "topk_membership: k must be at least 1");
  return rank_of(query, refset, ref_index) <= k;
}

double theta_distance(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), "theta_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double mean_nn_l2(const Matrix& recons, const Matrix& refset) {
  const auto table = nn_table(recons, refset);
  double s = 0.0;
  for (const auto& r : table) s += r.l2;
  return s / static_cast<double>(table.size());
}

std::vector<GridCell> grid_aggregate(const std::vector<GridRun>& runs, const Matrix& gt_set,
                                     const Matrix& partition_set, const Matrix& random_set) {
  require(!runs.empty(), "grid_aggregate: no runs");
  std::vector<GridCell> cells;
  cells.reserve(runs.size());
  for (const auto& run : runs) {
    require(run.x_rec.rows() > 0, "grid_aggregate: cell has no reconstruction");
    GridCell c;
    c.lambda1 = run.scheme.lambda1;
    c.lambda2 = run.scheme.lambda2;
    c.avg_l2_to_gt = mean_nn_l2(run.x_rec, gt_set);
    c.avg_l2_to_partition = mean_nn_l2(run.x_rec, partition_set);
    c.avg_l2_to_random = mean_nn_l2(run.x_rec, random_set);
    cells.push_back(c);
  }
  return cells;
}

}  // namespace recon
