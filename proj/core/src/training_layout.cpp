#include "uniclass/training_layout.hpp"

#include <string>

#include "uniclass/errors.hpp"

namespace uniclass {

SegmentedSequence segment_training(SymbolSpan x, std::size_t K, std::size_t N,
                                   std::size_t k0) {
  if (K < 1 || N < 1) throw InvalidSpec("layout needs K >= 1 and N >= 1");
  TrainingLayout layout{K, N, k0};
  if (x.size() < layout.n_bar())
    throw SequenceTooShort("layout needs " + std::to_string(layout.n_bar()) +
                           " symbols, sequence has " +
                           std::to_string(x.size()));
  SegmentedSequence out;
  out.layout = layout;
  out.blocks.reserve(K);
  for (std::size_t j = 0; j < K; ++j)
    out.blocks.push_back(x.subspan(layout.block_offset(j), N));
  out.suffix = x.subspan(layout.suffix_offset(), N);
  return out;
}

}  // namespace uniclass
