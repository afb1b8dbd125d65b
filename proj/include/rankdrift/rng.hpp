#pragma once

#include <array>
#include <cstdint>

// Deterministic random number generation. We avoid std:: distributions on
// purpose: their outputs are implementation-defined, and traces must be
// bit-reproducible across platforms for a fixed seed. The generator is
// xoshiro256**, seeded through SplitMix64, with doubles built from the top
// 53 bits. Both algorithms are public domain (Blackman/Vigna).

namespace rankdrift {

// Also used on its own as a 64-bit mixing function for per-cell seed
// derivation in parameter sweeps.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) { return splitmix64(x); }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0,1) with 53-bit resolution.
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in {0, ..., bound-1} by rejection (unbiased).
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

// Stream for sweep cell `index`: XOR the base seed with the mixed cell
// index. mix64(i) != mix64(j) for i != j (the finalizer is a bijection), so
// distinct cells never collide for a fixed base seed.
inline std::uint64_t derive_cell_seed(std::uint64_t base_seed,
                                      std::uint64_t cell_index) {
  return base_seed ^ mix64(cell_index + 1);
}

}  // namespace rankdrift
