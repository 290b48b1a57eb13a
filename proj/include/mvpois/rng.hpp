#pragma once

#include <cstdint>

namespace mvpois {

/// Counter-based uniform generator: output i of stream s is a pure function
/// of (seed, s, i), so parallel substreams replay identically regardless of
/// scheduling. Mixing is the splitmix64 finalizer over a hashed stream origin.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : base_(mix(seed + 0x9e3779b97f4a7c15ULL) ^ mix(stream * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL)),
        counter_(0) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }

  result_type operator()() { return mix(base_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform on the open interval (0,1).
  double uniform01() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1p-53; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t base_;
  std::uint64_t counter_;
};

}  // namespace mvpois
