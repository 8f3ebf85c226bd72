#pragma once

#include <stdexcept>
#include <string>

namespace uniclass {

// Base for all library errors. code() is a stable machine-readable tag used
// by the CLI's single-line error output; what() carries the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define UNICLASS_DEFINE_ERROR(Name, tag)                    \
  class Name : public Error {                               \
   public:                                                  \
    explicit Name(const std::string& message)               \
        : Error(tag, message) {}                            \
  }

UNICLASS_DEFINE_ERROR(NonStochasticRow, "non_stochastic_row");
UNICLASS_DEFINE_ERROR(ReducibleChain, "reducible_chain");
UNICLASS_DEFINE_ERROR(InvalidRate, "invalid_rate");
UNICLASS_DEFINE_ERROR(EnumerationCapExceeded, "enumeration_cap_exceeded");
UNICLASS_DEFINE_ERROR(ConstructionFailed, "construction_failed");
UNICLASS_DEFINE_ERROR(ZeroQProbability, "zero_q_probability");
UNICLASS_DEFINE_ERROR(BudgetExceeded, "budget_exceeded");
UNICLASS_DEFINE_ERROR(SequenceTooShort, "sequence_too_short");
UNICLASS_DEFINE_ERROR(LayoutMismatch, "layout_mismatch");
UNICLASS_DEFINE_ERROR(GrayZonePair, "gray_zone_pair");
UNICLASS_DEFINE_ERROR(IoError, "io_error");
UNICLASS_DEFINE_ERROR(InvalidSpec, "invalid_spec");

#undef UNICLASS_DEFINE_ERROR

}  // namespace uniclass
