// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// Seedable counter-free RNG with named substreams. Every consumer derives
// its own stream from (root seed, name, index), so adding a consumer never
// perturbs the draws seen by the others.

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace vgru {

// splitmix64; full 64-bit period, passes BigCrush as a mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // decorrelate trivially related seeds
    (void)next_u64();
    (void)next_u64();
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0,1), 53-bit mantissa
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // unbiased integer in [0, n)
  std::uint64_t below(std::uint64_t n);

  // standard normal via Box-Muller (no cached spare; deterministic draw count)
  double normal();

  // in-place Fisher-Yates
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Derives the stream seed for a named consumer. `index` distinguishes
// repeated uses of one site (e.g. the shuffle of each epoch).
std::uint64_t stream_seed(std::uint64_t root_seed, std::string_view name,
                          std::uint64_t index = 0);

inline Rng stream(std::uint64_t root_seed, std::string_view name,
                  std::uint64_t index = 0) {
  return Rng(stream_seed(root_seed, name, index));
}

}  // namespace vgru
