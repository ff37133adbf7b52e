#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace metaadapt {

// 64-bit FNV-1a, used to turn stream labels into seed material.
inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic random source. Sampling is implemented on top of raw 64-bit
// draws so that results depend only on the engine sequence, not on the
// standard library's distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Derives an independent stream from a master seed, a label and up to two
  // indices. Streams are stateless functions of their arguments, which makes
  // resumed runs reproduce the uninterrupted sequence.
  static Rng stream(uint64_t master, std::string_view label, uint64_t i = 0,
                    uint64_t j = 0) {
    uint64_t s = splitmix64(master ^ fnv1a64(label));
    s = splitmix64(s ^ (0x632be59bd9b4e019ull * (i + 1)));
    s = splitmix64(s ^ (0x9e3779b97f4a7c15ull * (j + 1)));
    return Rng(s);
  }

  uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n). Modulo bias is negligible for n << 2^64.
  int uniform_int(int n) {
    return static_cast<int>(next_u64() % static_cast<uint64_t>(n));
  }

  // Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = uniform(-1.0, 1.0);
      v = uniform(-1.0, 1.0);
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace metaadapt
