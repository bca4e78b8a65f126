#pragma once

#include <cstdint>

namespace lmdp {

// Counter-based generator: draw i of stream s under seed k is a pure
// function hash(k, s, i). Streams never interact, so the adversary and
// the trajectory sampler can share a seed without coupling.
class CounterRng {
 public:
  enum Stream : std::uint64_t { kAdversary = 1, kTrajectory = 2, kInstance = 3, kSampling = 4 };

  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t at(std::uint64_t counter) const {
    return mix(seed_ ^ mix(stream_ ^ mix(counter)));
  }
  // Uniform double in [0, 1) with 53 random bits.
  double uniform_at(std::uint64_t counter) const {
    return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
  }

  std::uint64_t next() { return at(counter_++); }
  double uniform() { return uniform_at(counter_++); }
  std::uint64_t counter() const { return counter_; }
  void seek(std::uint64_t counter) { counter_ = counter; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace lmdp
