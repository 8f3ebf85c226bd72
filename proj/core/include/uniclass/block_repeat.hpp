#pragma once

#include "uniclass/codebook.hpp"
#include "uniclass/source_model.hpp"

namespace uniclass {

// Binary source that emits codewords from a cyclic codebook in repeated
// runs with a random phase, then flips each bit independently with the
// dither rate. Sampling draws a fresh uniform codeword per run of
// ell*repeat + nu' symbols (nu' uniform on [1, ell]) and discards a uniform
// initial phase, so every window far from a run boundary looks like a
// rotated codeword plus noise.
//
// Block probabilities are evaluated with the single-codeword mixture over
// (codeword, rotation): exact for windows inside a run, and the model of
// record for windows that straddle run boundaries. Evaluation enumerates
// the mixture, so it is capped at enumeration_cap symbols (default 2*ell).
class BlockRepeatSource final : public SourceModel {
 public:
  BlockRepeatSource(CyclicCodebook codebook, double dither_rate,
                    int repeat = 1, int enumeration_cap = -1);

  Alphabet alphabet() const noexcept override { return Alphabet{2}; }
  void sample_into(std::span<Symbol> out, Rng& rng) const override;
  double log2_prob(SymbolSpan x) const override;
  // Conservative Condition-A floor implied by the dither channel.
  double delta_floor() const noexcept override { return dither_rate_ / 2.0; }
  std::string describe() const override;

  const CyclicCodebook& codebook() const noexcept { return codebook_; }
  double dither_rate() const noexcept { return dither_rate_; }
  int repeat() const noexcept { return repeat_; }
  int enumeration_cap() const noexcept { return enumeration_cap_; }

 private:
  CyclicCodebook codebook_;
  double dither_rate_;
  int repeat_;
  int enumeration_cap_;
  // Per codeword, the first 64 bits of its periodic extension, MSB-first;
  // mismatch counts against any rotation window become single popcounts.
  std::vector<std::uint64_t> streams_;
};

}  // namespace uniclass
