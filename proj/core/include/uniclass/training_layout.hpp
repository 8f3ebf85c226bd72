#pragma once

#include <cstddef>
#include <vector>

#include "uniclass/sequence.hpp"

namespace uniclass {

// Segmentation n_bar = K*(N+k0) + N of an observed sequence into K training
// blocks of length N separated by k0-symbol guard spaces, followed by the
// classified suffix Z of length N. Block j (0-based) starts at position
// j*(N+k0)+1, the suffix at K*(N+k0)+1 (1-based).
struct TrainingLayout {
  std::size_t K = 1;
  std::size_t N = 1;
  std::size_t k0 = 0;

  std::size_t n_bar() const noexcept { return K * (N + k0) + N; }
  std::size_t block_offset(std::size_t j) const noexcept {
    return j * (N + k0);
  }
  std::size_t suffix_offset() const noexcept { return K * (N + k0); }
};

// Views into the original sequence storage; valid while it lives.
struct SegmentedSequence {
  TrainingLayout layout;
  std::vector<SymbolSpan> blocks;
  SymbolSpan suffix;
};

// Guards are discarded; requires len(x) >= layout.n_bar().
SegmentedSequence segment_training(SymbolSpan x, std::size_t K, std::size_t N,
                                   std::size_t k0);

}  // namespace uniclass
