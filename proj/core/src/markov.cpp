#include "uniclass/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "uniclass/errors.hpp"

namespace uniclass {

namespace {

constexpr double kRowSumTolerance = 1e-12;
constexpr double kStationaryTolerance = 1e-9;
constexpr std::size_t kMaxPowerIterations = 1000000;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Strong connectivity of the positive-transition context graph; a chain
// whose support is not one communicating class has no unique stationary law.
bool strongly_connected(std::size_t n,
                        const std::vector<std::vector<std::size_t>>& fwd,
                        const std::vector<std::vector<std::size_t>>& rev) {
  for (const auto* adj : {&fwd, &rev}) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t visited = 1;
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w : (*adj)[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          ++visited;
          stack.push_back(w);
        }
      }
    }
    if (visited != n) return false;
  }
  return true;
}

}  // namespace

MarkovSource::MarkovSource(Alphabet alphabet, int order,
                           std::vector<std::vector<double>> transitions)
    : alphabet_(alphabet), order_(order) {
  if (alphabet_.size < 2 || alphabet_.size > 256)
    throw InvalidSpec("alphabet size must be in [2, 256]");
  if (order_ < 0) throw InvalidSpec("order must be >= 0");
  const std::size_t a = static_cast<std::size_t>(alphabet_.size);
  std::size_t contexts = 1;
  for (int i = 0; i < order_; ++i) {
    if (contexts > (std::size_t(1) << 20) / a)
      throw InvalidSpec("context space larger than 2^20");
    contexts *= a;
  }
  if (transitions.size() != contexts)
    throw InvalidSpec("expected " + std::to_string(contexts) +
                      " transition rows, got " +
                      std::to_string(transitions.size()));

  rows_.assign(contexts * a, 0.0);
  floor_ = 1.0;
  for (std::size_t c = 0; c < contexts; ++c) {
    const auto& row = transitions[c];
    if (row.size() != a)
      throw NonStochasticRow("row " + std::to_string(c) + " has " +
                             std::to_string(row.size()) + " entries");
    double sum = 0.0;
    for (double p : row) {
      if (p < 0.0)
        throw NonStochasticRow("row " + std::to_string(c) +
                               " has a negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      throw NonStochasticRow("row " + std::to_string(c) + " sums to " +
                             std::to_string(sum));
    for (std::size_t s = 0; s < a; ++s) {
      rows_[c * a + s] = row[s];
      floor_ = std::min(floor_, row[s]);
    }
  }
  compute_stationary();
}

std::size_t MarkovSource::context_count() const noexcept {
  std::size_t n = 1;
  for (int i = 0; i < order_; ++i) n *= static_cast<std::size_t>(alphabet_.size);
  return n;
}

void MarkovSource::compute_stationary() {
  const std::size_t a = static_cast<std::size_t>(alphabet_.size);
  const std::size_t n = context_count();
  if (order_ == 0) {
    pi_ = {1.0};
    return;
  }

  // Context c = (x_1..x_k) moves to (x_2..x_k, s) with probability row(c)[s].
  std::vector<std::vector<std::size_t>> fwd(n), rev(n);
  const std::size_t tail_mod = n / a;  // drop the leading symbol
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t base = (c % tail_mod) * a;
    for (std::size_t s = 0; s < a; ++s) {
      if (rows_[c * a + s] > 0.0) {
        fwd[c].push_back(base + s);
        rev[base + s].push_back(c);
      }
    }
  }
  if (!strongly_connected(n, fwd, rev))
    throw ReducibleChain("transition support is not irreducible");

  // Power iteration on the lazy kernel (I+T)/2; lazification kills
  // periodicity without changing the fixed point.
  std::vector<double> cur(n, 1.0 / static_cast<double>(n)), next(n, 0.0);
  for (std::size_t it = 0; it < kMaxPowerIterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t c = 0; c < n; ++c) {
      const double mass = cur[c];
      if (mass == 0.0) continue;
      next[c] += 0.5 * mass;
      const std::size_t base = (c % tail_mod) * a;
      for (std::size_t s = 0; s < a; ++s)
        next[base + s] += 0.5 * mass * rows_[c * a + s];
    }
    double diff = 0.0;
    for (std::size_t c = 0; c < n; ++c) diff += std::abs(next[c] - cur[c]);
    cur.swap(next);
    if (diff < kStationaryTolerance * 0.01) break;
  }
  const double total = std::accumulate(cur.begin(), cur.end(), 0.0);
  for (double& p : cur) p /= total;
  pi_ = std::move(cur);
}

namespace {

std::size_t pick_from_row(const double* row, std::size_t a, Rng& rng) {
  const double v = rng.uniform();
  double s = 0.0;
  for (std::size_t sym = 0; sym + 1 < a; ++sym) {
    s += row[sym];
    if (v < s) return sym;
  }
  return a - 1;
}

}  // namespace

void MarkovSource::sample_into(std::span<Symbol> out, Rng& rng) const {
  const std::size_t a = static_cast<std::size_t>(alphabet_.size);
  if (order_ == 0) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = static_cast<Symbol>(pick_from_row(rows_.data(), a, rng));
    return;
  }

  const std::size_t k = static_cast<std::size_t>(order_);
  const std::size_t tail_mod = context_count() / a;
  std::size_t context = pi_.size() - 1;
  {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t c = 0; c < pi_.size(); ++c) {
      acc += pi_[c];
      if (u < acc) {
        context = c;
        break;
      }
    }
  }
  // The initial context spells the first k symbols, earliest first.
  for (std::size_t i = 0, c = context, div = context_count() / a; i < k;
       ++i, div /= a) {
    if (i < out.size()) out[i] = static_cast<Symbol>(c / div);
    c %= div;
    if (div == 1) break;
  }
  for (std::size_t i = k; i < out.size(); ++i) {
    const std::size_t pick = pick_from_row(rows_.data() + context * a, a, rng);
    out[i] = static_cast<Symbol>(pick);
    context = (context % tail_mod) * a + pick;
  }
}

double MarkovSource::log2_prob(SymbolSpan x) const {
  if (x.empty()) return 0.0;
  const std::size_t a = static_cast<std::size_t>(alphabet_.size);
  const std::size_t k = static_cast<std::size_t>(order_);
  if (order_ == 0) {
    double lp = 0.0;
    for (Symbol s : x) {
      const double p = rows_[s];
      if (p <= 0.0) return kNegInf;
      lp += std::log2(p);
    }
    return lp;
  }
  const std::size_t n = x.size();
  if (n < k) {
    // Marginal of the stationary context law: contexts sharing the prefix
    // x_1^n form one contiguous index range.
    std::size_t lo = 0;
    for (std::size_t i = 0; i < n; ++i) lo = lo * a + x[i];
    std::size_t width = 1;
    for (std::size_t i = n; i < k; ++i) width *= a;
    lo *= width;
    double p = 0.0;
    for (std::size_t c = lo; c < lo + width; ++c) p += pi_[c];
    return p > 0.0 ? std::log2(p) : kNegInf;
  }
  std::size_t context = 0;
  for (std::size_t i = 0; i < k; ++i) context = context * a + x[i];
  double p0 = pi_[context];
  if (p0 <= 0.0) return kNegInf;
  double lp = std::log2(p0);
  const std::size_t tail_mod = context_count() / a;
  for (std::size_t i = k; i < n; ++i) {
    const double p = rows_[context * a + x[i]];
    if (p <= 0.0) return kNegInf;
    lp += std::log2(p);
    context = (context % tail_mod) * a + x[i];
  }
  return lp;
}

std::string MarkovSource::describe() const {
  std::ostringstream os;
  if (order_ == 0) {
    os << "iid(A=" << alphabet_.size << ")";
  } else {
    os << "markov(order=" << order_ << ", A=" << alphabet_.size << ")";
  }
  return os.str();
}

}  // namespace uniclass
