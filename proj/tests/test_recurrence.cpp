#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <optional>
#include <vector>

#include "uniclass/recurrence_index.hpp"
#include "uniclass/rng.hpp"

using namespace uniclass;

namespace {

std::vector<Symbol> bits(std::initializer_list<int> v) {
  std::vector<Symbol> out;
  for (int b : v) out.push_back(Symbol(b));
  return out;
}

std::vector<SymbolSpan> spans(const std::vector<std::vector<Symbol>>& blocks) {
  std::vector<SymbolSpan> out;
  for (const auto& b : blocks) out.emplace_back(b);
  return out;
}

// Reference scan: 1-based block-major position of the first within-block
// occurrence of z.
std::optional<std::size_t> brute_recurrence(
    const std::vector<std::vector<Symbol>>& blocks, SymbolSpan z) {
  std::size_t offset = 0;
  for (const auto& block : blocks) {
    if (block.size() >= z.size()) {
      for (std::size_t i = 0; i + z.size() <= block.size(); ++i) {
        if (std::equal(z.begin(), z.end(), block.begin() + i))
          return offset + i + 1;
      }
    }
    offset += block.size();
  }
  return std::nullopt;
}

int brute_match_length(const std::vector<std::vector<Symbol>>& blocks,
                       SymbolSpan z, std::size_t start, int l_max) {
  int best = 0;
  for (int l = 1; l <= l_max; ++l) {
    if (brute_recurrence(blocks, z.subspan(start, std::size_t(l))))
      best = l;
  }
  return best;
}

}  // namespace

TEST_CASE("recurrence time is block major and one based") {
  std::vector<std::vector<Symbol>> blocks = {bits({0, 0, 1, 0}),
                                             bits({0, 1, 0, 0})};
  RecurrenceIndex idx(spans(blocks), Alphabet{2});

  auto z01 = bits({0, 1});
  REQUIRE(idx.recurrence_time(SymbolSpan(z01)).has_value());
  CHECK(*idx.recurrence_time(SymbolSpan(z01)) == 2);

  auto z0100 = bits({0, 1, 0, 0});
  REQUIRE(idx.recurrence_time(SymbolSpan(z0100)).has_value());
  CHECK(*idx.recurrence_time(SymbolSpan(z0100)) == 5);

  auto z11 = bits({1, 1});
  CHECK_FALSE(idx.recurrence_time(SymbolSpan(z11)).has_value());
}

TEST_CASE("matches never span block boundaries") {
  std::vector<std::vector<Symbol>> blocks = {bits({0, 0, 0, 0}),
                                             bits({1, 1, 1, 1})};
  RecurrenceIndex idx(spans(blocks), Alphabet{2});
  auto z01 = bits({0, 1});
  CHECK_FALSE(idx.recurrence_time(SymbolSpan(z01)).has_value());

  auto z = bits({0, 1, 1, 1});
  CHECK(idx.match_length(SymbolSpan(z), 0, 2) == 1);  // "01" only crosses
  CHECK(idx.match_length(SymbolSpan(z), 1, 3) == 3);
}

TEST_CASE("empirical measure caps the recurrence time") {
  // 200 blocks of length 2; "11" first occurs in block index 149 (0-based).
  std::vector<std::vector<Symbol>> blocks(200, bits({0, 0}));
  blocks[149] = bits({1, 1});
  RecurrenceIndex idx(spans(blocks), Alphabet{2});
  auto z = bits({1, 1});
  REQUIRE(idx.recurrence_time(SymbolSpan(z)).has_value());
  CHECK(*idx.recurrence_time(SymbolSpan(z)) == 299);
  CHECK(idx.empirical_measure(SymbolSpan(z), 100) == 0.01);
  CHECK(idx.empirical_measure(SymbolSpan(z), 400) == 1.0 / 299.0);

  auto absent = bits({1, 0});
  CHECK(idx.empirical_measure(SymbolSpan(absent), 100) == 0.01);
}

TEST_CASE("index agrees with brute force scans") {
  Rng rng(424242);
  for (int trial = 0; trial < 1000; ++trial) {
    const int a = 2 + int(rng.below(2));  // alphabet 2 or 3
    const std::size_t k_blocks = 1 + rng.below(4);
    const std::size_t n_len = 4 + rng.below(21);
    std::vector<std::vector<Symbol>> blocks(k_blocks);
    for (auto& block : blocks) {
      block.resize(n_len);
      for (Symbol& s : block) s = Symbol(rng.below(std::uint64_t(a)));
    }
    RecurrenceIndex idx(spans(blocks), Alphabet{a});

    std::vector<Symbol> z;
    const std::size_t z_len = 1 + rng.below(8);
    if (rng.below(2) == 0 && z_len <= n_len) {
      // copy from the training content so hits are common
      const auto& src = blocks[rng.below(k_blocks)];
      const std::size_t at = rng.below(n_len - z_len + 1);
      z.assign(src.begin() + at, src.begin() + at + z_len);
    } else {
      z.resize(z_len);
      for (Symbol& s : z) s = Symbol(rng.below(std::uint64_t(a)));
    }

    CAPTURE(trial);
    CHECK(idx.recurrence_time(SymbolSpan(z)) ==
          brute_recurrence(blocks, SymbolSpan(z)));
  }
}

TEST_CASE("match length queries agree with brute force") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k_blocks = 1 + rng.below(3);
    const std::size_t n_len = 6 + rng.below(12);
    std::vector<std::vector<Symbol>> blocks(k_blocks);
    for (auto& block : blocks) {
      block.resize(n_len);
      for (Symbol& s : block) s = Symbol(rng.below(2));
    }
    RecurrenceIndex idx(spans(blocks), Alphabet{2});

    const int l_max = 1 + int(rng.below(5));
    std::vector<Symbol> z(std::size_t(l_max) + 1 + rng.below(10));
    for (Symbol& s : z) s = Symbol(rng.below(2));

    auto lengths = idx.match_lengths(SymbolSpan(z), l_max);
    REQUIRE(lengths.size() == z.size() - std::size_t(l_max));
    double total = 0.0;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      CAPTURE(trial);
      CAPTURE(i);
      CHECK(lengths[i] == idx.match_length(SymbolSpan(z), i, l_max));
      CHECK(lengths[i] == brute_match_length(blocks, SymbolSpan(z), i, l_max));
      total += double(lengths[i]);
    }
    CHECK(idx.avg_match_length(SymbolSpan(z), l_max) ==
          doctest::Approx(total / double(lengths.size())).epsilon(1e-12));
  }
}

TEST_CASE("mean recurrence time tracks the inverse block probability") {
  // Uniform binary source, |z| = 4: recurrence times should average near
  // 2^4 = 16 across independent training sequences.
  Rng rng(99);
  const std::size_t kBlocks = 40, len = 100;
  double sum = 0.0;
  const int trials = 2000;
  std::vector<Symbol> z = bits({1, 0, 1, 1});
  for (int t = 0; t < trials; ++t) {
    std::vector<std::vector<Symbol>> blocks(kBlocks);
    for (auto& block : blocks) {
      block.resize(len);
      for (Symbol& s : block) s = Symbol(rng.below(2));
    }
    RecurrenceIndex idx(spans(blocks), Alphabet{2});
    sum += double(idx.recurrence_time(SymbolSpan(z)).value_or(kBlocks * len));
  }
  CHECK(sum / trials == doctest::Approx(16.0).epsilon(0.12));
}
