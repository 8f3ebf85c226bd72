#pragma once

#include <cstddef>
#include <vector>

#include "uniclass/source_model.hpp"

namespace uniclass {

// Finite-order Markov chain started from its stationary law. order == 0 is
// i.i.d. Contexts are length-order strings indexed with the earliest symbol
// as the most significant digit, so fixing a prefix of the context selects a
// contiguous index range.
class MarkovSource final : public SourceModel {
 public:
  // transitions: A^order rows of A probabilities each, row-major.
  MarkovSource(Alphabet alphabet, int order,
               std::vector<std::vector<double>> transitions);

  Alphabet alphabet() const noexcept override { return alphabet_; }
  void sample_into(std::span<Symbol> out, Rng& rng) const override;
  double log2_prob(SymbolSpan x) const override;
  double delta_floor() const noexcept override { return floor_; }
  std::string describe() const override;

  int order() const noexcept { return order_; }
  double transition(std::size_t context, Symbol next) const noexcept {
    return rows_[context * static_cast<std::size_t>(alphabet_.size) + next];
  }
  // Stationary distribution over length-order contexts (single entry {1.0}
  // when order == 0).
  const std::vector<double>& stationary() const noexcept { return pi_; }

 private:
  std::size_t context_count() const noexcept;
  void compute_stationary();

  Alphabet alphabet_;
  int order_;
  std::vector<double> rows_;  // context_count * A, flattened
  std::vector<double> pi_;
  double floor_ = 0.0;
};

inline SourcePtr make_iid(Alphabet alphabet, std::vector<double> probs) {
  return std::make_shared<MarkovSource>(
      alphabet, 0, std::vector<std::vector<double>>{std::move(probs)});
}

inline SourcePtr make_bernoulli(double p_one) {
  return make_iid(Alphabet{2}, {1.0 - p_one, p_one});
}

}  // namespace uniclass
