#pragma once

#include <cstdint>

namespace gibbslz {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based generator: the k-th draw of a stream is a pure function of
// (seed, stream, k), so results do not depend on thread schedule or call order.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(splitmix64(splitmix64(seed) ^ splitmix64(stream ^ 0xD1B54A32D192ED03ULL))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return splitmix64(key_ + counter * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform on [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

// Stream id for one replica at one string length.
inline constexpr std::uint64_t replica_stream(std::uint64_t replica, std::uint64_t length) {
  return splitmix64(replica * 0x100000001B3ULL + length);
}

}  // namespace gibbslz
