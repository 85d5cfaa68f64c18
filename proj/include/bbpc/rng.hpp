#pragma once

#include <cmath>
#include <cstdint>

#include "bbpc/constants.hpp"

namespace bbpc {

// splitmix64, used for seeding and for deriving per-segment seeds.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Per-segment seed derivation rule (documented in README): mix the master seed
// with the segment sequence id through splitmix64 twice.
inline uint64_t derive_segment_seed(uint64_t master_seed, uint64_t sequence_id) {
  uint64_t s = master_seed ^ (0x9E3779B97F4A7C15ULL * (sequence_id + 1));
  splitmix64(s);
  return splitmix64(s);
}

// xoshiro256++ — fixed algorithm so seeded streams are identical on every
// platform (std::normal_distribution is implementation-defined).
class Xoshiro256 {
 public:
  explicit Xoshiro256(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  uint64_t next() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in (0,1]; never returns 0 so log() is safe.
  double uniform_pos() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal pair via Box-Muller (branch-free, deterministic).
  void normal_pair(double& a, double& b) {
    const double u1 = uniform_pos();
    const double u2 = uniform_pos();
    const double r = std::sqrt(-2.0 * std::log(u1));
    a = r * std::cos(2.0 * kPi * u2);
    b = r * std::sin(2.0 * kPi * u2);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double a, b;
    normal_pair(a, b);
    spare_ = b;
    have_spare_ = true;
    return a;
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace bbpc
