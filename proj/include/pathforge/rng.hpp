#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace pathforge {

// mt19937_64 with hand-rolled draw mappings. The standard distribution
// objects are implementation-defined, so seeded runs would not reproduce
// across standard libraries; these mappings are pinned.
class Rng {
public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Unbiased integer in [lo, hi] via rejection.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + static_cast<int64_t>(x % range);
  }

  // Uniform double in [0, 1) with 53 significant bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer. Combines a base seed with a stream index (sample
// number, instance hash, epoch) into a well-separated child seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace pathforge
