#pragma once

/// Deterministic sample points: a Halton sequence over the domain box with a
/// Cranley-Patterson rotation seeded from a 64-bit hash of the chart text.

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ahlab/error.hpp"
#include "ahlab/geometry.hpp"

namespace ahlab {

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Van der Corput radical inverse of k in base b.
inline double radical_inverse(std::uint64_t k, unsigned b) {
  double inv = 1.0 / b;
  double f = inv;
  double r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % b);
    k /= b;
    f *= inv;
  }
  return r;
}

/// Points k = 1..count of the rotated Halton sequence, mapped into the box.
inline std::vector<std::vector<double>> halton_points(const DomainBox& box, int count, std::uint64_t seed) {
  static constexpr std::array<unsigned, kMaxVariables> primes = {2, 3, 5, 7, 11, 13, 17, 19};
  const std::size_t n = box.lo.size();
  if (n > primes.size() || box.hi.size() != n) throw DimensionError("sampling box has an unsupported dimension");
  if (count < 0) throw DomainError("point count must be non-negative");
  std::vector<double> shift(n);
  std::uint64_t state = seed;
  for (auto& s : shift) s = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
  std::vector<std::vector<double>> out;
  for (int k = 1; k <= count; ++k) {
    std::vector<double> p(n);
    for (std::size_t d = 0; d < n; ++d) {
      double u = radical_inverse(static_cast<std::uint64_t>(k), primes[d]) + shift[d];
      u -= std::floor(u);
      p[d] = box.lo[d] + u * (box.hi[d] - box.lo[d]);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace ahlab
