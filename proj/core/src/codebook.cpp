#include "uniclass/codebook.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "uniclass/errors.hpp"

namespace uniclass {

namespace {

std::vector<std::uint32_t> orbit_of(std::uint32_t w, int ell) {
  std::vector<std::uint32_t> orbit{w};
  std::uint32_t cur = cyclic_shift(w, ell);
  while (cur != w) {
    orbit.push_back(cur);
    cur = cyclic_shift(cur, ell);
  }
  return orbit;
}

}  // namespace

bool CyclicCodebook::closed_under_shift() const noexcept {
  std::set<std::uint32_t> all(words.begin(), words.end());
  for (std::uint32_t w : words)
    if (!all.count(cyclic_shift(w, ell))) return false;
  return true;
}

int min_cross_distance(const CyclicCodebook& a, const CyclicCodebook& b) {
  int best = a.ell + 1;
  for (std::uint32_t x : a.words)
    for (std::uint32_t y : b.words)
      best = std::min(best, std::popcount(x ^ y));
  return best;
}

std::vector<CyclicCodebook> build_cyclic_codebooks(int ell, double rate,
                                                   double min_dist_frac,
                                                   int count,
                                                   std::uint64_t seed) {
  if (ell < 2 || ell > 24) throw InvalidSpec("ell must be in [2, 24]");
  if (!(rate > 0.0 && rate < 1.0)) throw InvalidSpec("rate must be in (0, 1)");
  if (!(min_dist_frac > 0.0 && min_dist_frac < 0.5))
    throw InvalidSpec("min_dist_frac must be in (0, 1/2)");
  if (count < 1) throw InvalidSpec("count must be >= 1");

  const std::size_t target =
      static_cast<std::size_t>(std::floor(std::pow(2.0, rate * ell)));
  const std::uint32_t universe = std::uint32_t(1) << ell;
  if (target < static_cast<std::size_t>(ell))
    throw InvalidSpec("target size 2^(rate*ell) below one full orbit");
  const int d_min = static_cast<int>(std::ceil(min_dist_frac * ell));

  // One shared random visiting order; each book scans it from the top.
  std::vector<std::uint32_t> order(universe);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i)
    std::swap(order[i], order[rng.below(i + 1)]);

  std::vector<CyclicCodebook> books;
  std::vector<char> taken(universe, 0);

  for (int b = 0; b < count; ++b) {
    CyclicCodebook book{ell, rate, {}};
    for (std::uint32_t cand : order) {
      if (book.words.size() >= target) break;
      if (taken[cand]) continue;
      const auto orbit = orbit_of(cand, ell);
      if (book.words.size() + orbit.size() > target) continue;
      bool ok = true;
      for (std::uint32_t w : orbit) {
        if (taken[w]) {
          ok = false;
          break;
        }
        for (const auto& other : books) {
          for (std::uint32_t v : other.words) {
            if (std::popcount(w ^ v) < d_min) {
              ok = false;
              break;
            }
          }
          if (!ok) break;
        }
        if (!ok) break;
      }
      if (!ok) continue;
      for (std::uint32_t w : orbit) {
        taken[w] = 1;
        book.words.push_back(w);
      }
    }
    if (book.words.size() < target)
      throw ConstructionFailed(
          "achieved " + std::to_string(books.size()) + " full codebooks plus " +
          std::to_string(book.words.size()) + "/" + std::to_string(target) +
          " words; requested " + std::to_string(count));
    std::sort(book.words.begin(), book.words.end());
    books.push_back(std::move(book));
  }
  return books;
}

}  // namespace uniclass
