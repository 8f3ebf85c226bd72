#pragma once

#include "uniclass/markov.hpp"
#include "uniclass/source_model.hpp"

namespace uniclass {

// Passes a source's output through a memoryless noise channel: modulo-2
// Bernoulli(rate) addition for binary alphabets, uniform symbol replacement
// at the same rate otherwise. rate == 0 returns the inner model unchanged;
// rate >= 1/2 is rejected (InvalidRate). Block-repeat sources absorb the
// noise into their own dither rate instead of gaining a wrapper.
SourcePtr dither(SourcePtr inner, double rate);

// Markov chain observed through the channel above. Exact block probabilities
// come from a forward pass over the hidden context chain.
class DitheredMarkov final : public SourceModel {
 public:
  DitheredMarkov(std::shared_ptr<const MarkovSource> inner, double rate);

  Alphabet alphabet() const noexcept override;
  void sample_into(std::span<Symbol> out, Rng& rng) const override;
  double log2_prob(SymbolSpan x) const override;
  double delta_floor() const noexcept override { return floor_; }
  std::string describe() const override;

  double rate() const noexcept { return rate_; }
  const std::shared_ptr<const MarkovSource>& inner() const noexcept {
    return inner_;
  }

 private:
  double channel(Symbol observed, Symbol clean) const noexcept;

  std::shared_ptr<const MarkovSource> inner_;
  double rate_;
  double floor_;
};

}  // namespace uniclass
