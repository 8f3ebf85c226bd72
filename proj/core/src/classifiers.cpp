#include "uniclass/classifiers.hpp"

#include <cmath>
#include <string>

#include "uniclass/errors.hpp"

namespace uniclass {

int ClassifierParams::esc_n() const {
  if (!(delta_source > 0.0 && delta_source < 1.0))
    throw InvalidSpec("delta_source must be in (0, 1)");
  if (!(eps0 > 0.0)) throw InvalidSpec("eps0 must be > 0");
  return static_cast<int>(
      std::floor(std::log2(static_cast<double>(n_bar())) /
                 (std::log2(1.0 / delta_source) + eps0)));
}

int ClassifierParams::vl_l_max() const {
  if (!(rate > 0.0)) throw InvalidSpec("rate must be > 0");
  if (!(eps0 > 0.0)) throw InvalidSpec("eps0 must be > 0");
  return static_cast<int>(std::floor(
      std::log2(static_cast<double>(N)) / (rate + eps0)));
}

namespace {

Decision decide(double statistic, double delta_crit) {
  const double threshold = delta_crit / 2.0;
  return {statistic >= threshold ? 1 : 0, statistic, threshold};
}

void check_equal_length(SymbolSpan x, SymbolSpan y) {
  if (x.size() != y.size())
    throw LayoutMismatch("X and Y must have equal length, got " +
                         std::to_string(x.size()) + " and " +
                         std::to_string(y.size()));
}

}  // namespace

Decision ml_classify(const SourceModel& p, const SourceModel& q, SymbolSpan z,
                     double delta_crit) {
  if (z.empty()) throw SequenceTooShort("ml_classify needs a nonempty block");
  const double lp = p.log2_prob(z);
  const double lq = q.log2_prob(z);
  const double statistic = (lp - lq) / static_cast<double>(z.size());
  return decide(statistic, delta_crit);
}

Decision esc_classify(const RecurrenceIndex& x_index, SymbolSpan x_suffix,
                      const RecurrenceIndex& y_index,
                      const ClassifierParams& params) {
  const int n = params.esc_n();
  if (n < 1)
    throw SequenceTooShort("esc_n fell below 1; sequences too short for the "
                           "declared delta_source");
  if (static_cast<std::size_t>(n) > params.N)
    throw SequenceTooShort("esc_n exceeds the block length");
  const SymbolSpan z = x_suffix.subspan(0, static_cast<std::size_t>(n));
  const double p_hat = x_index.empirical_measure(z, params.N);
  const double q_hat = y_index.empirical_measure(z, params.N);
  const double statistic = (std::log2(p_hat) - std::log2(q_hat)) / n;
  return decide(statistic, params.delta_crit);
}

Decision vl_classify(const RecurrenceIndex& x_index, SymbolSpan x_suffix,
                     const RecurrenceIndex& y_index,
                     const ClassifierParams& params) {
  const int l_max = params.vl_l_max();
  if (l_max < 1) throw SequenceTooShort("vl_l_max fell below 1");
  if (params.N < static_cast<std::size_t>(l_max) + 1)
    throw SequenceTooShort("block length must exceed l_max");
  const double guard = 1.0 / static_cast<double>(params.N);
  const double self_avg =
      std::max(x_index.avg_match_length(x_suffix, l_max), guard);
  const double cross_avg =
      std::max(y_index.avg_match_length(x_suffix, l_max), guard);
  const double log_n = std::log2(static_cast<double>(params.N));
  const double statistic = log_n / cross_avg - log_n / self_avg;
  return decide(statistic, params.delta_crit);
}

Decision esc_classify(SymbolSpan x, SymbolSpan y,
                      const ClassifierParams& params, Alphabet alphabet) {
  check_equal_length(x, y);
  const auto seg_x = segment_training(x, params.K, params.N, params.k0);
  const auto seg_y = segment_training(y, params.K, params.N, params.k0);
  const RecurrenceIndex idx_x(seg_x.blocks, alphabet);
  const RecurrenceIndex idx_y(seg_y.blocks, alphabet);
  return esc_classify(idx_x, seg_x.suffix, idx_y, params);
}

Decision vl_classify(SymbolSpan x, SymbolSpan y,
                     const ClassifierParams& params, Alphabet alphabet) {
  check_equal_length(x, y);
  const auto seg_x = segment_training(x, params.K, params.N, params.k0);
  const auto seg_y = segment_training(y, params.K, params.N, params.k0);
  const RecurrenceIndex idx_x(seg_x.blocks, alphabet);
  const RecurrenceIndex idx_y(seg_y.blocks, alphabet);
  return vl_classify(idx_x, seg_x.suffix, idx_y, params);
}

ErrorOutcome classify_error_event(const Decision& decision, TruthLabel truth) {
  switch (truth) {
    case TruthLabel::SameMarginal:
      return decision.verdict == 1 ? ErrorOutcome::Error
                                   : ErrorOutcome::Correct;
    case TruthLabel::DivergentAtLeastDelta:
      return decision.verdict == 0 ? ErrorOutcome::Error
                                   : ErrorOutcome::Correct;
    case TruthLabel::GrayZone:
      return ErrorOutcome::NoRequirement;
  }
  return ErrorOutcome::NoRequirement;
}

}  // namespace uniclass
