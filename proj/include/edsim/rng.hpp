#pragma once

#include <cmath>
#include <cstdint>

namespace edsim {

// splitmix64 finalizer, used for seeding and for deriving stream seeds.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seed of the k-th independent stream of a master seed. Streams are used for
// instances, racers, GA populations and forest trees, so parallel workers
// never share generator state and results do not depend on scheduling.
inline uint64_t stream_seed(uint64_t master, uint64_t k) {
  return splitmix64(master + (k + 1) * 0x9e3779b97f4a7c15ull);
}

// xoshiro256++ with hand-rolled distributions. The standard library leaves
// distribution algorithms implementation-defined; everything here is pinned
// so that a seed reproduces the same draws on any build.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& w : s_) {
      sm += 0x9e3779b97f4a7c15ull;
      uint64_t z = sm;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      w = z ^ (z >> 31);
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9e3779b97f4a7c15ull;
  }

  static Rng stream(uint64_t master, uint64_t k) { return Rng(stream_seed(master, k)); }

  uint64_t next_u64() {
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

  // Uniform in [0,1), 53 random bits.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  // Unbiased integer in [0,n).
  uint64_t below(uint64_t n) {
    const uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Inclusive range.
  int uniform_int(int lo, int hi) { return lo + int(below(uint64_t(hi - lo) + 1)); }

  // Box-Muller without caching; two uniforms per draw keeps the stream simple.
  double normal() {
    double u1 = 1.0 - next_double();  // (0,1], log is finite
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
  }

  double lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }

  // Inverse-CDF triangular on [lo, hi] with the given mode.
  double triangular(double lo, double mode, double hi) {
    if (hi <= lo) return lo;
    double u = next_double();
    double f = (mode - lo) / (hi - lo);
    if (u < f) return lo + std::sqrt(u * (hi - lo) * (mode - lo));
    return hi - std::sqrt((1.0 - u) * (hi - lo) * (hi - mode));
  }

  double exponential(double rate) { return -std::log(1.0 - next_double()) / rate; }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
};

}  // namespace edsim
