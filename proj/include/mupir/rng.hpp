#pragma once

#include <cstdint>

namespace mupir {

// Counter-based deterministic generator (splitmix64 output function).
// A stream is keyed by (seed, stream id, round index), so per-user and
// per-trial randomness is reproducible and independent of evaluation order.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t round = 0);

  std::uint64_t next_u64();

  // Uniform in [0, bound) by rejection; no modulo bias.
  int next_below(int bound);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream-id namespaces so file bytes, query randomness, demand draws and
// trial streams never collide.
namespace stream {
inline constexpr std::uint64_t kFileBytes = 0x01;
inline constexpr std::uint64_t kUserVector = 0x02;
inline constexpr std::uint64_t kDemands = 0x03;
inline constexpr std::uint64_t kTrial = 0x04;

inline constexpr std::uint64_t id(std::uint64_t tag, std::uint64_t index) {
  return (tag << 56) ^ index;
}
}  // namespace stream

}  // namespace mupir
