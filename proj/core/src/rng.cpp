// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include "vgru/rng.hpp"

#include <cmath>

namespace vgru {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) return 0;
  // rejection sampling over the top multiple of n
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  // u1 in (0,1]; avoids log(0)
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

std::uint64_t stream_seed(std::uint64_t root_seed, std::string_view name,
                          std::uint64_t index) {
  std::uint64_t s = root_seed ^ fnv1a64(name);
  std::uint64_t z = s;
  (void)splitmix64(z);
  z ^= 0x6a09e667f3bcc909ull + index * 0x9e3779b97f4a7c15ull;
  (void)splitmix64(z);
  return z;
}

}  // namespace vgru
