#pragma once

#include <cstdint>
#include <initializer_list>

namespace gnno {

// Deterministic, platform-independent random stream. Standard-library
// distributions are implementation-defined, so uniform draws are built
// directly on the raw generator output.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {
    // splitmix64 warm-up so that nearby seeds diverge immediately
    next_u64();
    next_u64();
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // unbiased uniform in [0, n), n > 0
  uint64_t next_below(uint64_t n) {
    const uint64_t threshold = -n % n;  // 2^64 mod n
    for (;;) {
      const uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

 private:
  uint64_t state_;
};

// Combines stream identifiers (seed, step, ordinal, ...) into one seed.
inline uint64_t mix_seed(std::initializer_list<uint64_t> parts) {
  uint64_t h = 0x243f6a8885a308d3ULL;
  for (uint64_t p : parts) {
    p = (p ^ (p >> 33)) * 0xff51afd7ed558ccdULL;
    h ^= p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

}  // namespace gnno
