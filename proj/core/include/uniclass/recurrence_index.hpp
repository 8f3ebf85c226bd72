#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "uniclass/sequence.hpp"
#include "uniclass/training_layout.hpp"

namespace uniclass {

// Substring index over K equal-length training blocks. Built as a suffix
// automaton of the block concatenation with a separator sentinel between
// blocks, so no reported match ever spans a block boundary. Immutable after
// construction; queries are const and safe to run concurrently.
class RecurrenceIndex {
 public:
  RecurrenceIndex(const std::vector<SymbolSpan>& blocks, Alphabet alphabet);

  // First-occurrence position of z (1-based, block-major: block index times
  // N plus the within-block offset); nullopt when z occurs in no block.
  std::optional<std::size_t> recurrence_time(SymbolSpan z) const;

  // 1/min(recurrence_time, cap_n); both an absent pattern and one first
  // occurring beyond cap_n give 1/cap_n.
  double empirical_measure(SymbolSpan z, std::size_t cap_n) const;

  // Largest j <= l_max such that z[i..i+j-1] (0-based start i) occurs in
  // some block; 0 when even z[i] alone is absent. Requires i+l_max <= |z|.
  int match_length(SymbolSpan z, std::size_t i, int l_max) const;

  // match_length for every start 0..|z|-l_max-1 in one O(|z|) pass.
  std::vector<int> match_lengths(SymbolSpan z, int l_max) const;

  // Mean of match_lengths; requires |z| >= l_max + 1.
  double avg_match_length(SymbolSpan z, int l_max) const;

  std::size_t block_length() const noexcept { return block_len_; }
  std::size_t block_count() const noexcept { return block_count_; }

 private:
  void extend(int symbol, std::size_t position);
  int transition(int state, int symbol) const noexcept;
  void set_transition(int state, int symbol, int to);
  int new_state(int len);
  void finalize_min_end();

  int alphabet_with_sep_;
  std::size_t block_len_ = 0;
  std::size_t block_count_ = 0;
  bool dense_;

  std::vector<int> len_;
  std::vector<int> link_;
  std::vector<std::int64_t> min_end_;
  std::vector<int> dense_trans_;
  std::vector<std::vector<std::pair<std::uint16_t, int>>> sparse_trans_;
  int last_ = 0;
};

}  // namespace uniclass
