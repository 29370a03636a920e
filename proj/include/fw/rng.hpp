#pragma once

#include <cstdint>

#include "fw/common.hpp"

namespace fw {

/// Counter-based generator: the n-th draw of stream (seed, stream) is a pure
/// function of (seed, stream, n). split() derives an independent child stream
/// so parallel sweep points and restarts get reproducible sequences.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  CounterRng split(std::uint64_t child) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);
  /// Standard normal (Box-Muller, one value per pair of uniforms).
  double normal();

  Vec normal_vector(Index n);
  /// Uniformly distributed on the unit sphere.
  Vec unit_vector(Index n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace fw
