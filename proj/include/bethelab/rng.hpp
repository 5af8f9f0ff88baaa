#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace bethelab {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_name(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view name, std::uint64_t index) {
  return mix64(mix64(seed ^ hash_name(name)) + mix64(index));
}

// Counter-based generator: output i of stream (seed, name) is a pure function
// of (seed, name, i), so per-row / per-type streams never interfere.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream)
      : k0_(mix64(seed ^ 0x5851F42D4C957F2DULL)), k1_(mix64(hash_name(stream) + k0_)) {}

  Rng fork(std::string_view sub) const {
    Rng r(*this);
    r.k1_ = mix64(k1_ ^ hash_name(sub));
    r.k0_ = mix64(k0_ + hash_name(sub));
    r.ctr_ = 0;
    return r;
  }
  Rng fork(std::uint64_t index) const {
    Rng r(*this);
    r.k1_ = mix64(k1_ + mix64(index));
    r.ctr_ = 0;
    return r;
  }

  std::uint64_t next() { return mix64(mix64(ctr_++ ^ k0_) + k1_); }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do x = next();
    while (x >= limit);
    return x % n;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t counter() const { return ctr_; }

 private:
  std::uint64_t k0_, k1_;
  std::uint64_t ctr_ = 0;
};

}  // namespace bethelab
