#pragma once

// Initialization regimes for the reconstructed inputs x: uniform noise,
// Gaussian noise, ground truth, a held-out partition, and the two-parameter
// mixing family
//
//   x_init = lambda2 (lambda1 x_gt + (1 - lambda1) x_part) + (1 - lambda2) x_rnd.

#include <span>
#include <vector>

#include "recon/linalg.hpp"
#include "recon/rng.hpp"

namespace recon {

enum class InitKind { Uniform01, Gaussian, GroundTruth, Partition, Mix };

struct MixScheme {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
};

struct InitScheme {
  InitKind kind = InitKind::Uniform01;
  double sigma = 1.0;  // Gaussian only
  MixScheme mix;       // Mix only
};

struct InitSources {
  Matrix ground_truth;    // N x K
  Matrix partition_pool;  // M x K, M >= N, rows disjoint from the training set
};

struct InitResult {
  Matrix x0;
  // pool rows used per slot (Partition and Mix); empty otherwise
  std::vector<std::size_t> partition_rows;
};

// Deterministic given the stream. GroundTruth/Partition/Mix require sources.
InitResult make_init(const InitScheme& scheme, std::size_t n, std::size_t k,
                     const InitSources* sources, RngStream& rng);

// the mixing formula, exact affine combination of three equal-shape matrices
Matrix mix_init(const MixScheme& m, const Matrix& x_gt, const Matrix& x_part, const Matrix& x_rnd);

// Cartesian product of lambda values over (lambda1, lambda2), lambda2 varying
// fastest; the default experiment grid is 5 x 5 = 25 schemes.
std::vector<MixScheme> lambda_grid(std::span<const double> lambdas);

}  // namespace recon
