#pragma once

#include <array>
#include <cstdint>

// Counter-based random streams (Philox4x32-10, Salmon et al., Random123).
//
// A Stream is keyed by (seed, stream_index).  Streams with distinct indices
// are statistically independent, so simulations hand replicate r the stream
// (master_seed, r) and get scheduling-independent, reproducible draws no
// matter how replicates are distributed over worker threads.

namespace trifree::rng {

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double next_double();

  double next_normal();  // standard normal (Box-Muller)
  double next_gamma(double shape, double scale);
  double next_beta(double a, double b);
  long next_poisson(double mean);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint32_t, 2> key_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int avail_ = 0;
};

// One Philox4x32-10 block; exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

}  // namespace trifree::rng
