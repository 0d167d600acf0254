#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mergenas/errors.hpp"

namespace mergenas {

// All randomness flows through this wrapper. std::mt19937_64 has a fixed
// sequence by standard, and every transform below is plain arithmetic, so
// runs are reproducible across compilers and platforms (the std::*_distribution
// adaptors make no such promise and are deliberately avoided).
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t u64() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double f64() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * f64(); }

  // Uniform integer in [0, n). Fixed-point multiply keeps it branch-free and
  // deterministic; the bias at n << 2^64 is far below anything observable.
  int index(int n) {
    if (n <= 0) throw contract_error("Rng::index: n must be positive");
    return static_cast<int>(
        (static_cast<unsigned __int128>(u64()) * static_cast<uint64_t>(n)) >> 64);
  }

  bool coin() { return (u64() >> 63) != 0; }

  // Categorical draw by CDF inversion. probs need not sum exactly to 1;
  // the final bucket absorbs the remainder.
  int categorical(std::span<const double> probs) {
    if (probs.empty()) throw contract_error("Rng::categorical: empty distribution");
    double r = f64();
    double cum = 0.0;
    for (size_t i = 0; i + 1 < probs.size(); ++i) {
      cum += probs[i];
      if (r < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  // k distinct indices from [0, n), Floyd's sampling, order randomized by
  // construction enough for tournament use.
  std::vector<int> sample_without_replacement(int n, int k) {
    if (k > n) throw contract_error("sample_without_replacement: k > n");
    std::vector<int> out;
    out.reserve(k);
    for (int j = n - k; j < n; ++j) {
      int t = index(j + 1);
      bool seen = false;
      for (int v : out) {
        if (v == t) { seen = true; break; }
      }
      out.push_back(seen ? j : t);
    }
    return out;
  }

 private:
  std::mt19937_64 gen_;
};

// Cheap stateless hash used for per-genotype noise. splitmix64 finalizer.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_bytes(uint64_t seed, const void* data, size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  uint64_t h = mix64(seed ^ 0x51'7c'c1'b7'27'22'0a'95ULL);
  for (size_t i = 0; i < n; ++i) h = mix64(h ^ p[i]);
  return h;
}

}  // namespace mergenas
