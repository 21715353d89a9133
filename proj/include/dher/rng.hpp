#pragma once
#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace dher {

// splitmix64; used to spread seeds for derived sub-streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seeded random stream. All sampling in the workbench goes through this
// wrapper so full experiment runs replay bit-for-bit from their seeds.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  // Independent stream for (seed, tag); tag separates e.g. env/policy/pool draws.
  static RandomStream derive(std::uint64_t seed, std::uint64_t tag) {
    return RandomStream(splitmix64(seed) ^ splitmix64(tag ^ 0x5bf0363546795331ull));
  }

  // [0, 1)
  double uniform() { return (engine_() >> 11) * (1.0 / 9007199254740992.0); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // integer in [0, n), n >= 1
  std::size_t uniform_index(std::size_t n) {
    return std::min<std::size_t>(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t bits() { return engine_(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(i)]);
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace dher
