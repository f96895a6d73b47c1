#include "secfield/random.hpp"

namespace secfield {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, StreamTag tag) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ splitmix64(index));
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  return h;
}

}  // namespace secfield
