// Seeded deterministic random helpers. std::mt19937_64 is bit-exact across
// platforms; the derived draws below avoid std distributions, whose output
// sequences are implementation-defined.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mrbf {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // uniform in [0, 1)
  double unit() { return (gen_() >> 11) * 0x1.0p-53; }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // rejection sampling keeps the draw unbiased
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// splitmix64, used to derive independent per-item seeds from a master seed
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace mrbf
