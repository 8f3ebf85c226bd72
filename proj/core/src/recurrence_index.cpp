#include "uniclass/recurrence_index.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "uniclass/errors.hpp"

namespace uniclass {

namespace {
constexpr std::int64_t kNoEnd = std::numeric_limits<std::int64_t>::max();
constexpr int kDenseLimit = 16;  // transition array mode up to this fanout
}  // namespace

RecurrenceIndex::RecurrenceIndex(const std::vector<SymbolSpan>& blocks,
                                 Alphabet alphabet)
    : alphabet_with_sep_(alphabet.size + 1),
      dense_(alphabet.size + 1 <= kDenseLimit) {
  if (blocks.empty()) throw InvalidSpec("index needs at least one block");
  block_len_ = blocks.front().size();
  block_count_ = blocks.size();
  std::size_t total = 0;
  for (const auto& b : blocks) {
    if (b.size() != block_len_)
      throw InvalidSpec("all training blocks must have equal length");
    total += b.size() + 1;
  }

  len_.reserve(2 * total + 2);
  link_.reserve(2 * total + 2);
  min_end_.reserve(2 * total + 2);
  if (dense_) dense_trans_.reserve((2 * total + 2) * alphabet_with_sep_);

  new_state(0);  // root
  link_[0] = -1;
  last_ = 0;

  const int sep = alphabet_with_sep_ - 1;
  std::size_t position = 0;
  for (std::size_t j = 0; j < block_count_; ++j) {
    for (Symbol s : blocks[j]) extend(s, position++);
    if (j + 1 < block_count_) extend(sep, position++);
  }
  finalize_min_end();
}

int RecurrenceIndex::new_state(int len) {
  len_.push_back(len);
  link_.push_back(-1);
  min_end_.push_back(kNoEnd);
  if (dense_)
    dense_trans_.resize(dense_trans_.size() + alphabet_with_sep_, -1);
  else
    sparse_trans_.emplace_back();
  return static_cast<int>(len_.size()) - 1;
}

int RecurrenceIndex::transition(int state, int symbol) const noexcept {
  if (dense_) return dense_trans_[state * alphabet_with_sep_ + symbol];
  for (const auto& [c, to] : sparse_trans_[state])
    if (c == symbol) return to;
  return -1;
}

void RecurrenceIndex::set_transition(int state, int symbol, int to) {
  if (dense_) {
    dense_trans_[state * alphabet_with_sep_ + symbol] = to;
    return;
  }
  for (auto& [c, existing] : sparse_trans_[state]) {
    if (c == symbol) {
      existing = to;
      return;
    }
  }
  sparse_trans_[state].emplace_back(static_cast<std::uint16_t>(symbol), to);
}

void RecurrenceIndex::extend(int symbol, std::size_t position) {
  const int cur = new_state(len_[last_] + 1);
  min_end_[cur] = static_cast<std::int64_t>(position);
  int p = last_;
  while (p != -1 && transition(p, symbol) == -1) {
    set_transition(p, symbol, cur);
    p = link_[p];
  }
  if (p == -1) {
    link_[cur] = 0;
  } else {
    const int q = transition(p, symbol);
    if (len_[p] + 1 == len_[q]) {
      link_[cur] = q;
    } else {
      const int clone = new_state(len_[p] + 1);
      link_[clone] = link_[q];
      if (dense_) {
        std::copy_n(dense_trans_.begin() +
                        static_cast<std::ptrdiff_t>(q) * alphabet_with_sep_,
                    alphabet_with_sep_,
                    dense_trans_.begin() +
                        static_cast<std::ptrdiff_t>(clone) *
                            alphabet_with_sep_);
      } else {
        sparse_trans_[clone] = sparse_trans_[q];
      }
      while (p != -1 && transition(p, symbol) == q) {
        set_transition(p, symbol, clone);
        p = link_[p];
      }
      link_[q] = clone;
      link_[cur] = clone;
    }
  }
  last_ = cur;
}

void RecurrenceIndex::finalize_min_end() {
  // min endpos propagates up the suffix-link tree; processing states in
  // decreasing len order visits children before parents.
  const int n = static_cast<int>(len_.size());
  std::vector<int> order(n);
  {
    const int max_len =
        *std::max_element(len_.begin(), len_.end());
    std::vector<int> count(max_len + 2, 0);
    for (int v = 0; v < n; ++v) ++count[len_[v]];
    for (int i = 1; i <= max_len + 1; ++i) count[i] += count[i - 1];
    for (int v = 0; v < n; ++v) order[--count[len_[v]]] = v;
  }
  for (int i = n - 1; i > 0; --i) {
    const int v = order[i];
    if (link_[v] >= 0)
      min_end_[link_[v]] = std::min(min_end_[link_[v]], min_end_[v]);
  }
}

std::optional<std::size_t> RecurrenceIndex::recurrence_time(
    SymbolSpan z) const {
  if (z.empty()) return std::nullopt;
  int state = 0;
  for (Symbol s : z) {
    if (static_cast<int>(s) >= alphabet_with_sep_ - 1) return std::nullopt;
    state = transition(state, s);
    if (state == -1) return std::nullopt;
  }
  const std::size_t end = static_cast<std::size_t>(min_end_[state]);
  const std::size_t start = end + 1 - z.size();
  const std::size_t stride = block_len_ + 1;
  const std::size_t block = start / stride;
  const std::size_t offset = start % stride;
  return block * block_len_ + offset + 1;
}

double RecurrenceIndex::empirical_measure(SymbolSpan z,
                                          std::size_t cap_n) const {
  const auto time = recurrence_time(z);
  const std::size_t clamped =
      time && *time <= cap_n ? *time : cap_n;
  return 1.0 / static_cast<double>(clamped);
}

int RecurrenceIndex::match_length(SymbolSpan z, std::size_t i,
                                  int l_max) const {
  if (i + static_cast<std::size_t>(l_max) > z.size())
    throw SequenceTooShort("match window exceeds the sequence");
  int state = 0;
  int matched = 0;
  for (int j = 0; j < l_max; ++j) {
    const Symbol s = z[i + static_cast<std::size_t>(j)];
    if (static_cast<int>(s) >= alphabet_with_sep_ - 1) break;
    const int next = transition(state, s);
    if (next == -1) break;
    state = next;
    matched = j + 1;
  }
  return matched;
}

std::vector<int> RecurrenceIndex::match_lengths(SymbolSpan z,
                                                int l_max) const {
  if (z.size() < static_cast<std::size_t>(l_max) + 1)
    throw SequenceTooShort("need at least l_max + 1 symbols");
  const std::size_t n = z.size();

  // Matching statistics: ms[e] = longest match ending at e.
  std::vector<int> ms(n, 0);
  int state = 0, length = 0;
  for (std::size_t e = 0; e < n; ++e) {
    const int sym = static_cast<int>(z[e]);
    if (sym >= alphabet_with_sep_ - 1) {
      state = 0;
      length = 0;
      ms[e] = 0;
      continue;
    }
    while (state != 0 && transition(state, sym) == -1) {
      state = link_[state];
      length = len_[state];
    }
    const int next = transition(state, sym);
    if (next == -1) {
      state = 0;
      length = 0;
    } else {
      state = next;
      ++length;
    }
    ms[e] = length;
  }

  // start(e) = e - ms[e] + 1 is nondecreasing, so the largest end reachable
  // from each start advances monotonically.
  const std::size_t starts = n - static_cast<std::size_t>(l_max);
  std::vector<int> out(starts, 0);
  std::ptrdiff_t e = -1;
  for (std::size_t i = 0; i < starts; ++i) {
    if (e < static_cast<std::ptrdiff_t>(i) - 1)
      e = static_cast<std::ptrdiff_t>(i) - 1;
    while (e + 1 < static_cast<std::ptrdiff_t>(n) &&
           static_cast<std::ptrdiff_t>(e + 1) - ms[e + 1] + 1 <=
               static_cast<std::ptrdiff_t>(i))
      ++e;
    if (e >= static_cast<std::ptrdiff_t>(i)) {
      const std::ptrdiff_t run = e - static_cast<std::ptrdiff_t>(i) + 1;
      out[i] = static_cast<int>(
          std::min<std::ptrdiff_t>(run, l_max));
    }
  }
  return out;
}

double RecurrenceIndex::avg_match_length(SymbolSpan z, int l_max) const {
  const auto lengths = match_lengths(z, l_max);
  if (lengths.empty()) throw SequenceTooShort("no match windows available");
  double sum = 0.0;
  for (int v : lengths) sum += v;
  return sum / static_cast<double>(lengths.size());
}

}  // namespace uniclass
