#include "mupir/rng.hpp"

#include <stdexcept>

namespace mupir {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t round) {
  // Fold the three key parts through the mixer so that nearby seeds or
  // stream ids do not produce correlated outputs.
  key_ = mix64(mix64(mix64(seed) ^ stream) ^ round);
}

std::uint64_t StreamRng::next_u64() {
  std::uint64_t z = key_ + 0x9E3779B97F4A7C15ULL * ++counter_;
  return mix64(z);
}

int StreamRng::next_below(int bound) {
  if (bound <= 0) throw std::invalid_argument("next_below: bound must be > 0");
  const std::uint64_t b = static_cast<std::uint64_t>(bound);
  // Rejection sampling: discard the top partial block so every residue is
  // equally likely.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % b + 1) % b;
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r > limit);
  return static_cast<int>(r % b);
}

}  // namespace mupir
