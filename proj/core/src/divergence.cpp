#include "uniclass/divergence.hpp"

#include <cmath>
#include <limits>

#include "uniclass/errors.hpp"
#include "uniclass/rng.hpp"

namespace uniclass {

namespace {

constexpr std::size_t kExactEnumerationLimit = std::size_t(1) << 20;
constexpr std::size_t kPrefixTreeBudget = 1000000;

bool enumeration_feasible(int alphabet, int n, std::size_t limit) {
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) {
    if (total > limit / static_cast<std::size_t>(alphabet)) return false;
    total *= static_cast<std::size_t>(alphabet);
  }
  return total <= limit;
}

DivergenceValue kl_exact(const SourceModel& p, const SourceModel& q, int n) {
  const int a = p.alphabet().size;
  if (!enumeration_feasible(a, n, kExactEnumerationLimit))
    throw BudgetExceeded("exact KL needs A^n <= 2^20 blocks");
  std::vector<Symbol> z(static_cast<std::size_t>(n), 0);
  double acc = 0.0;
  for (;;) {
    const double lp = p.log2_prob(SymbolSpan(z));
    if (lp != -std::numeric_limits<double>::infinity()) {
      const double lq = q.log2_prob(SymbolSpan(z));
      if (lq == -std::numeric_limits<double>::infinity())
        throw ZeroQProbability("Q assigns probability 0 to a P-possible block");
      acc += std::exp2(lp) * (lp - lq);
    }
    int i = n - 1;
    while (i >= 0 && z[i] == a - 1) z[i--] = 0;
    if (i < 0) break;
    ++z[i];
  }
  return {DivKind::KL, n, acc / n, DivMethod::Exact, 0.0};
}

DivergenceValue kl_monte_carlo(const SourceModel& p, const SourceModel& q,
                               int n, std::size_t samples,
                               std::uint64_t seed) {
  if (samples == 0) throw BudgetExceeded("Monte Carlo KL needs samples > 0");
  Rng rng(seed);
  std::vector<Symbol> z(static_cast<std::size_t>(n));
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < samples; ++t) {
    p.sample_into(std::span<Symbol>(z), rng);
    const double lp = p.log2_prob(SymbolSpan(z));
    const double lq = q.log2_prob(SymbolSpan(z));
    if (lq == -std::numeric_limits<double>::infinity())
      throw ZeroQProbability("Q assigns probability 0 to a sampled block");
    const double v = (lp - lq) / n;
    sum += v;
    sum_sq += v * v;
  }
  const double m = static_cast<double>(samples);
  const double mean = sum / m;
  const double var = std::max(0.0, sum_sq / m - mean * mean);
  return {DivKind::KL, n, mean, DivMethod::MonteCarlo,
          std::sqrt(var / m)};
}

}  // namespace

int VLLengthParams::l_max() const {
  if (n < 2) throw InvalidSpec("VL resolution n must be >= 2");
  if (!(eps0 > 0.0)) throw InvalidSpec("eps0 must be > 0");
  if (!(rate > 0.0)) throw InvalidSpec("rate must be > 0");
  const int cap = static_cast<int>(std::floor(std::log2(n) / (rate + eps0)));
  if (cap < 1) throw InvalidSpec("l_max came out below 1; raise n");
  return cap;
}

DivergenceValue kl_divergence_n(const SourceModel& p, const SourceModel& q,
                                int n, DivMethod method, std::size_t samples,
                                std::uint64_t seed) {
  if (n < 1) throw InvalidSpec("n must be >= 1");
  if (p.alphabet().size != q.alphabet().size)
    throw InvalidSpec("P and Q must share an alphabet");
  return method == DivMethod::Exact ? kl_exact(p, q, n)
                                    : kl_monte_carlo(p, q, n, samples, seed);
}

std::vector<DivergenceValue> kl_divergence_sequence(
    const SourceModel& p, const SourceModel& q, const std::vector<int>& n_list,
    DivMethod method, std::size_t samples, std::uint64_t seed) {
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1])
      throw InvalidSpec("n_list must be strictly ascending");
  std::vector<DivergenceValue> out;
  out.reserve(n_list.size());
  for (int n : n_list)
    out.push_back(kl_divergence_n(p, q, n, method, samples, seed));
  return out;
}

int vl_prefix_length(SymbolSpan x, const SourceModel& eval_model,
                     const VLLengthParams& params) {
  const int cap = params.l_max();
  if (x.size() < static_cast<std::size_t>(cap))
    throw SequenceTooShort("vl_prefix_length needs at least l_max symbols");
  const double threshold = -std::log2(static_cast<double>(params.n));
  for (int j = 1; j <= cap; ++j) {
    if (eval_model.log2_prob(x.subspan(0, j)) < threshold) return j;
  }
  return cap;
}

double vl_expected_length(const SourceModel& p, const SourceModel& eval_model,
                          const VLLengthParams& params, LengthMethod method,
                          std::size_t mc_samples, std::uint64_t seed,
                          double* std_error_out) {
  const int cap = params.l_max();
  const double threshold = -std::log2(static_cast<double>(params.n));
  if (std_error_out) *std_error_out = 0.0;

  if (method != LengthMethod::MonteCarlo) {
    // Depth-first over prefixes whose eval probability is still >= 1/n.
    // A child below the threshold is a crossing leaf at its depth; a child
    // still above it at depth l_max is a capped leaf.
    const int a = p.alphabet().size;
    struct Node {
      std::vector<Symbol> prefix;
      int next_symbol = 0;
    };
    std::vector<Node> stack;
    stack.push_back({{}, 0});
    double expected = 0.0;
    std::size_t visited = 0;
    bool blown = false;
    while (!stack.empty()) {
      Node& top = stack.back();
      if (top.next_symbol >= a) {
        stack.pop_back();
        continue;
      }
      std::vector<Symbol> child = top.prefix;
      child.push_back(static_cast<Symbol>(top.next_symbol++));
      if (++visited > kPrefixTreeBudget) {
        blown = true;
        break;
      }
      const int depth = static_cast<int>(child.size());
      const double le = eval_model.log2_prob(SymbolSpan(child));
      const bool crossed = le < threshold;
      if (crossed || depth == cap) {
        const double lp = p.log2_prob(SymbolSpan(child));
        if (lp != -std::numeric_limits<double>::infinity())
          expected += std::exp2(lp) * depth;
        continue;
      }
      stack.push_back({std::move(child), 0});
    }
    if (!blown) return expected;
    if (method == LengthMethod::Exact)
      throw BudgetExceeded("prefix tree exceeded the 10^6 node budget");
  }

  if (mc_samples == 0) throw BudgetExceeded("Monte Carlo needs samples > 0");
  Rng rng(seed);
  std::vector<Symbol> x(static_cast<std::size_t>(cap));
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < mc_samples; ++t) {
    p.sample_into(std::span<Symbol>(x), rng);
    const int len = vl_prefix_length(SymbolSpan(x), eval_model, params);
    sum += len;
    sum_sq += static_cast<double>(len) * len;
  }
  const double m = static_cast<double>(mc_samples);
  const double mean = sum / m;
  if (std_error_out) {
    const double var = std::max(0.0, sum_sq / m - mean * mean);
    *std_error_out = std::sqrt(var / m);
  }
  return mean;
}

DivergenceValue vl_divergence_n(const SourceModel& p, const SourceModel& q,
                                const VLLengthParams& params,
                                LengthMethod method, std::size_t mc_samples,
                                std::uint64_t seed) {
  const double log_n = std::log2(static_cast<double>(params.n));
  double se_cross = 0.0, se_self = 0.0;
  const double cross =
      vl_expected_length(p, q, params, method, mc_samples, seed, &se_cross);
  const double self = vl_expected_length(p, p, params, method, mc_samples,
                                         seed + 1, &se_self);
  const double value = log_n / cross - log_n / self;
  // First-order error propagation through 1/L.
  const double se =
      std::sqrt(std::pow(log_n / (cross * cross) * se_cross, 2) +
                std::pow(log_n / (self * self) * se_self, 2));
  const bool exact = se_cross == 0.0 && se_self == 0.0;
  return {DivKind::VL, params.n, value,
          exact ? DivMethod::Exact : DivMethod::MonteCarlo, se};
}

}  // namespace uniclass
