#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "uniclass/errors.hpp"

namespace uniclass {

using Symbol = std::uint8_t;
using SymbolSpan = std::span<const Symbol>;

struct Alphabet {
  int size = 2;  // 2..256; symbols are 0..size-1

  bool valid_symbol(Symbol s) const noexcept {
    return static_cast<int>(s) < size;
  }
  friend bool operator==(const Alphabet&, const Alphabet&) = default;
};

// Finite sequence over an alphabet. Positions are 1-based in documentation
// and error messages; storage is the usual 0-based vector.
class Sequence {
 public:
  Sequence() = default;
  Sequence(Alphabet alphabet, std::vector<Symbol> data)
      : alphabet_(alphabet), data_(std::move(data)) {
    validate();
  }

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  Symbol operator[](std::size_t i) const noexcept { return data_[i]; }
  SymbolSpan view() const noexcept { return SymbolSpan(data_); }
  SymbolSpan prefix(std::size_t n) const noexcept {
    return SymbolSpan(data_.data(), n);
  }
  const std::vector<Symbol>& data() const noexcept { return data_; }
  std::vector<Symbol>& mutable_data() noexcept { return data_; }

 private:
  void validate() const {
    if (alphabet_.size < 2 || alphabet_.size > 256)
      throw InvalidSpec("alphabet size must be in [2, 256]");
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!alphabet_.valid_symbol(data_[i]))
        throw InvalidSpec("symbol at position " + std::to_string(i + 1) +
                          " is outside the alphabet");
    }
  }

  Alphabet alphabet_{};
  std::vector<Symbol> data_{};
};

}  // namespace uniclass
