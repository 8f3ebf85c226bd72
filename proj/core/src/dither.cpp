#include "uniclass/dither.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "uniclass/block_repeat.hpp"
#include "uniclass/errors.hpp"

namespace uniclass {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

SourcePtr dither(SourcePtr inner, double rate) {
  if (!(rate >= 0.0 && rate < 0.5))
    throw InvalidRate("dither rate must be in [0, 1/2), got " +
                      std::to_string(rate));
  if (rate == 0.0) return inner;
  if (auto block = std::dynamic_pointer_cast<const BlockRepeatSource>(inner)) {
    // Two binary symmetric channels compose into one.
    const double a = block->dither_rate();
    return std::make_shared<BlockRepeatSource>(
        block->codebook(), a * (1.0 - rate) + rate * (1.0 - a),
        block->repeat(), block->enumeration_cap());
  }
  auto markov = std::dynamic_pointer_cast<const MarkovSource>(inner);
  if (!markov) throw InvalidSpec("dither supports Markov and block-repeat sources");
  return std::make_shared<DitheredMarkov>(std::move(markov), rate);
}

DitheredMarkov::DitheredMarkov(std::shared_ptr<const MarkovSource> inner,
                               double rate)
    : inner_(std::move(inner)), rate_(rate) {
  if (!(rate_ > 0.0 && rate_ < 0.5))
    throw InvalidRate("dither rate must be in (0, 1/2), got " +
                      std::to_string(rate_));
  const int a = inner_->alphabet().size;
  const double channel_floor = a == 2 ? rate_ : rate_ / a;
  const double through = a == 2 ? 1.0 - 2.0 * rate_ : 1.0 - rate_;
  floor_ = channel_floor + through * inner_->delta_floor();
}

Alphabet DitheredMarkov::alphabet() const noexcept {
  return inner_->alphabet();
}

double DitheredMarkov::channel(Symbol observed, Symbol clean) const noexcept {
  const int a = inner_->alphabet().size;
  if (a == 2) return observed == clean ? 1.0 - rate_ : rate_;
  const double keep = 1.0 - rate_;
  const double spread = rate_ / a;
  return (observed == clean ? keep : 0.0) + spread;
}

void DitheredMarkov::sample_into(std::span<Symbol> out, Rng& rng) const {
  inner_->sample_into(out, rng);
  const int a = inner_->alphabet().size;
  if (a == 2) {
    for (Symbol& s : out)
      if (rng.bernoulli(rate_)) s ^= 1;
  } else {
    for (Symbol& s : out)
      if (rng.bernoulli(rate_))
        s = static_cast<Symbol>(rng.below(static_cast<std::uint64_t>(a)));
  }
}

double DitheredMarkov::log2_prob(SymbolSpan x) const {
  if (x.empty()) return 0.0;
  const std::size_t a = static_cast<std::size_t>(inner_->alphabet().size);
  const std::size_t k = static_cast<std::size_t>(inner_->order());

  if (k == 0) {
    double lp = 0.0;
    for (Symbol obs : x) {
      double p = 0.0;
      for (std::size_t w = 0; w < a; ++w)
        p += inner_->transition(0, static_cast<Symbol>(w)) *
             channel(obs, static_cast<Symbol>(w));
      if (p <= 0.0) return kNegInf;
      lp += std::log2(p);
    }
    return lp;
  }

  const auto& pi = inner_->stationary();
  const std::size_t contexts = pi.size();
  const std::size_t tail_mod = contexts / a;
  const std::size_t n = x.size();

  // Hidden state after absorbing the first k clean symbols is the initial
  // context itself; its digits are emitted through the channel.
  std::vector<double> alpha(contexts, 0.0);
  double log_scale = 0.0;
  const std::size_t head = std::min(n, k);
  for (std::size_t c = 0; c < contexts; ++c) {
    double w = pi[c];
    std::size_t rem = c;
    std::size_t div = contexts / a;
    for (std::size_t i = 0; i < head && w > 0.0; ++i) {
      const Symbol digit = static_cast<Symbol>(rem / div);
      w *= channel(x[i], digit);
      rem %= div;
      div = div > 1 ? div / a : 1;
    }
    alpha[c] = w;
  }
  if (n <= k) {
    // Digits beyond n are unconstrained; alpha already integrates them via pi.
    double total = 0.0;
    for (double v : alpha) total += v;
    return total > 0.0 ? std::log2(total) : kNegInf;
  }

  std::vector<double> next(contexts, 0.0);
  for (std::size_t i = k; i < n; ++i) {
    std::fill(next.begin(), next.end(), 0.0);
    double norm = 0.0;
    for (std::size_t c = 0; c < contexts; ++c) {
      const double mass = alpha[c];
      if (mass == 0.0) continue;
      const std::size_t base = (c % tail_mod) * a;
      for (std::size_t w = 0; w < a; ++w) {
        const double t = inner_->transition(c, static_cast<Symbol>(w));
        if (t == 0.0) continue;
        next[base + w] += mass * t * channel(x[i], static_cast<Symbol>(w));
      }
    }
    for (double v : next) norm += v;
    if (norm <= 0.0) return kNegInf;
    for (double& v : next) v /= norm;
    log_scale += std::log2(norm);
    alpha.swap(next);
  }
  return log_scale;
}

std::string DitheredMarkov::describe() const {
  return "dither(" + inner_->describe() + ", " + std::to_string(rate_) + ")";
}

}  // namespace uniclass
