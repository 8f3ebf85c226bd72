#pragma once

#include <memory>
#include <string>

#include "uniclass/rng.hpp"
#include "uniclass/sequence.hpp"

namespace uniclass {

// A finite-alphabet stationary process that can be sampled and whose n-block
// probabilities can be evaluated. Implementations are immutable after
// construction; concurrent sampling is safe because each call owns its Rng.
class SourceModel {
 public:
  virtual ~SourceModel() = default;

  virtual Alphabet alphabet() const noexcept = 0;

  // Fills out deterministically from rng.
  virtual void sample_into(std::span<Symbol> out, Rng& rng) const = 0;

  // log2 P(x_1^n) for the stationary law; -inf when the block is impossible.
  virtual double log2_prob(SymbolSpan x) const = 0;

  // Largest delta such that every conditional next-symbol probability is
  // known to be >= delta. 0 when no positive floor is claimed.
  virtual double delta_floor() const noexcept = 0;

  virtual std::string describe() const = 0;

  Sequence sample(std::size_t length, std::uint64_t seed) const {
    Rng rng(seed);
    std::vector<Symbol> data(length);
    sample_into(std::span<Symbol>(data), rng);
    return Sequence(alphabet(), std::move(data));
  }
};

using SourcePtr = std::shared_ptr<const SourceModel>;

}  // namespace uniclass
