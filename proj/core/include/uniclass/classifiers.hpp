#pragma once

#include <cstdint>

#include "uniclass/recurrence_index.hpp"
#include "uniclass/source_model.hpp"
#include "uniclass/training_layout.hpp"

namespace uniclass {

// Shared parameter bundle for the ESC and VL decision rules.
//   esc_n    = floor(log2(n_bar) / (log2(1/delta_source) + eps0))
//   vl_l_max = floor(log2(N) / (rate + eps0))
struct ClassifierParams {
  double delta_crit = 0.5;  // fidelity criterion, bits
  std::size_t K = 1;
  std::size_t N = 1;
  std::size_t k0 = 0;
  double eps0 = 0.25;
  double delta_source = 0.05;  // positive-transition floor driving esc_n
  double rate = 0.5;           // rate driving vl_l_max

  std::size_t n_bar() const noexcept { return K * (N + k0) + N; }
  int esc_n() const;
  int vl_l_max() const;
};

// verdict 1 declares the two laws different; inclusive threshold at
// delta_crit / 2 for every classifier.
struct Decision {
  int verdict = 0;
  double statistic = 0.0;
  double threshold = 0.0;
};

// Known-source reference: statistic (1/n)(log2 P(z) - log2 Q(z)).
Decision ml_classify(const SourceModel& p, const SourceModel& q, SymbolSpan z,
                     double delta_crit);

// Empirical statistics classifier over a pair of observed sequences of
// length n_bar each: empirical measures from the recurrence index of each
// sequence's training blocks, evaluated on the first esc_n symbols of X's
// suffix.
Decision esc_classify(SymbolSpan x, SymbolSpan y,
                      const ClassifierParams& params, Alphabet alphabet);

// Variable-length classifier: statistic log2(N)/avg_cross - log2(N)/avg_self
// over X's suffix, averages guarded below by 1/N.
Decision vl_classify(SymbolSpan x, SymbolSpan y,
                     const ClassifierParams& params, Alphabet alphabet);

// Index-level variants for callers that already segmented and indexed the
// pair (the experiment harness reuses indexes across classifiers).
Decision esc_classify(const RecurrenceIndex& x_index, SymbolSpan x_suffix,
                      const RecurrenceIndex& y_index,
                      const ClassifierParams& params);
Decision vl_classify(const RecurrenceIndex& x_index, SymbolSpan x_suffix,
                     const RecurrenceIndex& y_index,
                     const ClassifierParams& params);

enum class TruthLabel { SameMarginal, DivergentAtLeastDelta, GrayZone };
enum class ErrorOutcome { Error, Correct, NoRequirement };

// Error semantics: verdict 1 on a same-law pair and verdict 0 on a pair at
// divergence >= delta are errors; gray-zone pairs impose no requirement.
ErrorOutcome classify_error_event(const Decision& decision, TruthLabel truth);

}  // namespace uniclass
