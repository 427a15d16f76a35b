#pragma once

#include <cstdint>

namespace flock {

// Counter-based deterministic random stream (splitmix64 core).
//
// Every source of randomness in the project flows from one 64-bit seed.
// Independent substreams are derived by hashing the parent seed with a tag,
// so e.g. walk j of update step i of pass p uses
//   rng.substream(p).substream(i).substream(j)
// and is reproducible regardless of sampling order or thread count.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), state_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection sampling, exactly unbiased.
  int uniform_int(int n);

  // Standard normal via Box-Muller (caches the spare value).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Independent stream derived from this stream's seed and a tag.
  Rng substream(uint64_t tag) const {
    return Rng(mix(seed_ ^ mix(tag + 0x632be59bd9b4e019ull)));
  }

  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

 private:
  uint64_t seed_;
  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace flock
