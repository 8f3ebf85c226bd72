#include "uniclass/block_repeat.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "uniclass/errors.hpp"

namespace uniclass {

BlockRepeatSource::BlockRepeatSource(CyclicCodebook codebook,
                                     double dither_rate, int repeat,
                                     int enumeration_cap)
    : codebook_(std::move(codebook)),
      dither_rate_(dither_rate),
      repeat_(repeat),
      enumeration_cap_(enumeration_cap < 0 ? 2 * codebook_.ell
                                           : enumeration_cap) {
  if (codebook_.words.empty()) throw InvalidSpec("codebook has no words");
  if (!(dither_rate_ >= 0.0 && dither_rate_ < 0.5))
    throw InvalidRate("dither rate must be in [0, 1/2), got " +
                      std::to_string(dither_rate_));
  if (repeat_ < 1) throw InvalidSpec("repeat must be >= 1");

  const int ell = codebook_.ell;
  streams_.reserve(codebook_.words.size());
  for (std::uint32_t word : codebook_.words) {
    std::uint64_t stream = 0;
    for (int p = 0; p < 64; ++p)
      stream = (stream << 1) |
               (static_cast<std::uint64_t>(word >> (ell - 1 - p % ell)) & 1u);
    streams_.push_back(stream);
  }
}

void BlockRepeatSource::sample_into(std::span<Symbol> out, Rng& rng) const {
  const int ell = codebook_.ell;
  const std::size_t period = static_cast<std::size_t>(ell) * repeat_;
  std::size_t skip = rng.below(period);  // initial phase
  std::size_t written = 0;
  while (written < out.size()) {
    const std::uint32_t word =
        codebook_.words[rng.below(codebook_.words.size())];
    const std::size_t tail = 1 + rng.below(static_cast<std::uint64_t>(ell));
    const std::size_t run = period + tail;
    for (std::size_t i = 0; i < run && written < out.size(); ++i) {
      if (skip > 0) {
        --skip;
        continue;
      }
      const int bit_pos = static_cast<int>(i % ell);
      out[written++] =
          static_cast<Symbol>((word >> (ell - 1 - bit_pos)) & 1u);
    }
  }
  if (dither_rate_ > 0.0) {
    for (Symbol& s : out)
      if (rng.bernoulli(dither_rate_)) s ^= 1;
  }
}

double BlockRepeatSource::log2_prob(SymbolSpan x) const {
  const int ell = codebook_.ell;
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  if (n > static_cast<std::size_t>(enumeration_cap_))
    throw EnumerationCapExceeded(
        "block probability enumeration capped at " +
        std::to_string(enumeration_cap_) + " symbols, got " +
        std::to_string(n));

  // P(x) = avg over (word, rotation) of the dither likelihood against the
  // periodic reference, a function of the mismatch count alone.
  std::vector<double> likelihood(n + 1, 0.0);
  likelihood[0] = std::pow(1.0 - dither_rate_, static_cast<double>(n));
  for (std::size_t d = 1; d <= n; ++d)
    likelihood[d] = dither_rate_ > 0.0
                        ? likelihood[d - 1] * dither_rate_ /
                              (1.0 - dither_rate_)
                        : 0.0;

  double total = 0.0;
  if (n <= 32) {
    // Packed path: both query and each rotated reference window live in a
    // 64-bit register, MSB-first, so a mismatch count is one popcount.
    std::uint64_t packed = 0;
    for (std::size_t i = 0; i < n; ++i)
      packed = (packed << 1) | (x[i] & 1u);
    packed <<= 64 - n;
    const std::uint64_t mask = ~0ULL << (64 - n);
    for (std::uint64_t stream : streams_) {
      for (int r = 0; r < ell; ++r) {
        const std::uint64_t window = (stream << r) & mask;
        total += likelihood[std::popcount(packed ^ window)];
      }
    }
  } else {
    for (std::uint32_t word : codebook_.words) {
      for (int r = 0; r < ell; ++r) {
        int mismatches = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const int bit_pos = static_cast<int>((r + i) % ell);
          const Symbol ref =
              static_cast<Symbol>((word >> (ell - 1 - bit_pos)) & 1u);
          mismatches += ref != x[i];
        }
        total += likelihood[static_cast<std::size_t>(mismatches)];
      }
    }
  }
  total /= static_cast<double>(codebook_.words.size()) * ell;
  return total > 0.0 ? std::log2(total)
                     : -std::numeric_limits<double>::infinity();
}

std::string BlockRepeatSource::describe() const {
  std::ostringstream os;
  os << "block_repeat(ell=" << codebook_.ell
     << ", words=" << codebook_.words.size() << ", dither=" << dither_rate_
     << ", repeat=" << repeat_ << ")";
  return os.str();
}

}  // namespace uniclass
