#pragma once

#include "randhyp/core.hpp"

#include <cstdint>
#include <random>

namespace randhyp {

/// Deterministic random stream. Child streams are derived from the parent
/// seed and a counter, so trial `i` always sees the same numbers no matter
/// which thread runs it or in what order.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent stream keyed by (seed, index). Does not advance this stream.
  RandomStream child(std::uint64_t index) const;

  double normal();
  /// Uniform on [0, 1).
  double uniform();
  Vector normal_vector(Index size);

  std::mt19937_64& engine() noexcept { return engine_; }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// SplitMix64 finalizer; used for seed derivation and content hashes.
std::uint64_t mix64(std::uint64_t x) noexcept;

} // namespace randhyp
