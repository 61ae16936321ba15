#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace slicesim {

// Substream split function: a stream seed is
//   splitmix64(master ^ splitmix64(fnv1a(domain) + index)).
// Every consumer (per-UE traffic, per-UE channel, per-layer jitter, ...)
// derives its own stream this way, so adding or removing one consumer
// never shifts the draws seen by another.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t derive_seed(uint64_t master, std::string_view domain, uint64_t index = 0) {
  return splitmix64(master ^ splitmix64(fnv1a64(domain) + index));
}

// mt19937_64 is bit-exact per the standard; the samplers below avoid
// std::*_distribution so sequences do not depend on the standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  static Rng substream(uint64_t master, std::string_view domain, uint64_t index = 0) {
    return Rng(derive_seed(master, domain, index));
  }

  uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [lo, hi], inclusive, rejection-sampled (no modulo bias)
  int64_t uniform_int(int64_t lo, int64_t hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<int64_t>(next_u64());
    uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return lo + static_cast<int64_t>(x % span);
  }

  size_t pick(size_t n) { return static_cast<size_t>(uniform_int(0, static_cast<int64_t>(n) - 1)); }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller, one value per call (no cached spare, so the draw count
  // per call is fixed and substreams stay reproducible)
  double gaussian(double mean, double std_dev) {
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    double u2 = uniform();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + std_dev * z;
  }

  double lognormal_clamped(double mu, double sigma, double lo, double hi) {
    double v = std::exp(gaussian(mu, sigma));
    return v < lo ? lo : (v > hi ? hi : v);
  }

  // number of tokens in a burst: 1 + Geometric, mean = mean_size, min 1
  int64_t geometric_burst(double mean_size) {
    double p = 1.0 / mean_size;
    double u = uniform();
    if (u >= 1.0) u = std::nextafter(1.0, 0.0);
    return 1 + static_cast<int64_t>(std::floor(std::log1p(-u) / std::log1p(-p)));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace slicesim
