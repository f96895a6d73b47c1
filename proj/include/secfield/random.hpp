#pragma once

#include <cstdint>

namespace secfield {

/// Purpose tags for derived random streams.
enum class StreamTag : std::uint64_t {
  kField = 1,
  kPermutation = 2,
  kKey = 3,
  kMessage = 4,
  kBobNoise = 5,
  kEveNoise = 6,
  kLeakage = 7,
  kFieldCheck = 8,
};

/// Seed for stream (seed, index, tag), from chained splitmix64 finalizers.
/// Independent of scheduling, so parallel work cannot reorder randomness.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, StreamTag tag);

}  // namespace secfield
