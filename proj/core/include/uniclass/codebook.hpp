#pragma once

#include <cstdint>
#include <vector>

#include "uniclass/rng.hpp"

namespace uniclass {

// A set of binary ell-vectors closed under cyclic shifts, stored as the low
// ell bits of a uint32 with bit (ell-1-i) holding position i+1.
struct CyclicCodebook {
  int ell = 0;
  double rate = 0.0;          // construction target size is 2^(rate*ell)
  std::vector<std::uint32_t> words;

  bool closed_under_shift() const noexcept;
};

inline std::uint32_t cyclic_shift(std::uint32_t w, int ell) noexcept {
  // right cyclic shift by one position
  return ((w >> 1) | (w << (ell - 1))) & ((std::uint32_t(1) << ell) - 1);
}

// Greedy random orbit selection with rejection: visit all ell-bit words in a
// seeded random order, and grow each codebook from whole shift orbits that
// keep every cross-codebook Hamming distance >= ceil(min_dist_frac * ell).
// Because the books are shift-closed, checking stored word pairs covers all
// relative rotations. Throws ConstructionFailed when the target count or
// sizes cannot be met; the message records the achieved shape.
std::vector<CyclicCodebook> build_cyclic_codebooks(int ell, double rate,
                                                   double min_dist_frac,
                                                   int count,
                                                   std::uint64_t seed);

// Smallest cross-codebook Hamming distance over all word pairs; exhaustive.
int min_cross_distance(const CyclicCodebook& a, const CyclicCodebook& b);

}  // namespace uniclass
