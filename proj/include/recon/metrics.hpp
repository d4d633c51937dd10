#pragma once

// Reconstruction quality metrics: exhaustive nearest-neighbor matching in
// pixel L2, nearest-neighbor ranks, theta distance, and the per-cell grid
// aggregation for the mixing experiments.

#include <cstddef>
#include <span>
#include <vector>

#include "recon/init_schemes.hpp"
#include "recon/linalg.hpp"

namespace recon {

struct NNRecord {
  std::size_t recon_index = 0;
  std::size_t nn_index = 0;
  double l2 = 0.0;
};

// Exhaustive L2 scan, ties broken by the lowest reference index.
NNRecord nearest_neighbor(std::span<const double> query, const Matrix& refset);

// one record per reconstruction row; scans run in parallel
std::vector<NNRecord> nn_table(const Matrix& recons, const Matrix& refset);

// 1-based position of ref_index when the reference set is sorted by distance
// to the query (ties resolved by index order).
std::size_t rank_of(std::span<const double> query, const Matrix& refset, std::size_t ref_index);

bool topk_membership(std::span<const double> query, const Matrix& refset, std::size_t ref_index,
                     std::size_t k);

// |a - b|_2^2
double theta_distance(const Vector& a, const Vector& b);

double mean_nn_l2(const Matrix& recons, const Matrix& refset);

struct GridCell {
  double lambda1 = 0.0, lambda2 = 0.0;
  double avg_l2_to_gt = 0.0;
  double avg_l2_to_partition = 0.0;
  double avg_l2_to_random = 0.0;
};

struct GridRun {
  MixScheme scheme;
  Matrix x_rec;
};

// Per-cell averages of per-sample NN distances against the three reference
// sets. Every cell must carry a completed run.
std::vector<GridCell> grid_aggregate(const std::vector<GridRun>& runs, const Matrix& gt_set,
                                     const Matrix& partition_set, const Matrix& random_set);

}  // namespace recon
