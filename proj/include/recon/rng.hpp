#pragma once

// Seeded random streams. The generator is xoshiro256++ (Blackman & Vigna),
// state-seeded with four outputs of splitmix64. Streams are decorrelated by
// folding the stream id through the murmur3 64-bit finalizer before seeding,
// so (master_seed, stream_id) fully determines the draw sequence.

#include <cstdint>
#include <string_view>
#include <vector>

namespace recon {

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  // [0, 1) with 53 random bits
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // standard normal via the polar (Marsaglia) method, second mate cached
  double gaussian();

  // unbiased integer in [0, n) by rejection
  std::uint64_t below(std::uint64_t n);

  // back-to-front Fisher-Yates
  void shuffle_indices(std::vector<std::size_t>& v);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t s_[4];
  std::uint64_t master_seed_, stream_id_;
  bool have_mate_ = false;
  double mate_ = 0.0;
};

// Stable stream ids for pipeline stages: FNV-1a of the stage name mixed with
// the run index. Documented so manifests can name their streams.
std::uint64_t stream_id_for(std::string_view stage, std::uint64_t index = 0);

}  // namespace recon
