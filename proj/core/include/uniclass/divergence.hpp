#pragma once

#include <cstdint>
#include <vector>

#include "uniclass/source_model.hpp"

namespace uniclass {

enum class DivKind { KL, VL };
enum class DivMethod { Exact, MonteCarlo };

// Divergences are in bits per symbol. std_error is 0 for exact values.
struct DivergenceValue {
  DivKind kind = DivKind::KL;
  int order_n = 0;
  double value = 0.0;
  DivMethod method = DivMethod::Exact;
  double std_error = 0.0;
};

// Resolution parameter n plus the cap on prefix lengths,
// l_max = floor(log2(n) / (rate + eps0)).
struct VLLengthParams {
  int n = 16;
  double rate = 0.5;
  double eps0 = 0.25;

  int l_max() const;
};

// Normalized n-th order KL divergence (1/n) sum_z P(z) log2(P(z)/Q(z)).
// Exact mode enumerates all A^n blocks and requires A^n <= 2^20; Monte Carlo
// averages (1/n)(log2 P(Z) - log2 Q(Z)) over Z ~ P.
DivergenceValue kl_divergence_n(const SourceModel& p, const SourceModel& q,
                                int n, DivMethod method,
                                std::size_t samples = 20000,
                                std::uint64_t seed = 1);

std::vector<DivergenceValue> kl_divergence_sequence(
    const SourceModel& p, const SourceModel& q, const std::vector<int>& n_list,
    DivMethod method, std::size_t samples = 20000, std::uint64_t seed = 1);

// Threshold-crossing prefix length: min(l_max, smallest j with
// P(x_1^j) < 1/n). Ties P(x_1^j) == 1/n count as not yet crossed.
int vl_prefix_length(SymbolSpan x, const SourceModel& eval_model,
                     const VLLengthParams& params);

enum class LengthMethod { Auto, Exact, MonteCarlo };

// E_P[vl_prefix_length(X, eval_model)] in [1, l_max]. Exact mode walks the
// prefix tree of eval_model-probable prefixes (node budget 10^6); Auto falls
// back to Monte Carlo when the budget is exceeded.
double vl_expected_length(const SourceModel& p, const SourceModel& eval_model,
                          const VLLengthParams& params,
                          LengthMethod method = LengthMethod::Auto,
                          std::size_t mc_samples = 20000,
                          std::uint64_t seed = 1,
                          double* std_error_out = nullptr);

// log2(n)/L_n(P|Q) - log2(n)/L_n(P|P).
DivergenceValue vl_divergence_n(const SourceModel& p, const SourceModel& q,
                                const VLLengthParams& params,
                                LengthMethod method = LengthMethod::Auto,
                                std::size_t mc_samples = 20000,
                                std::uint64_t seed = 1);

}  // namespace uniclass
