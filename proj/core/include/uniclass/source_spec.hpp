#pragma once

#include <cstdint>
#include <string>

#include "uniclass/source_model.hpp"

namespace uniclass {

// JSON schema:
//   {"type": "iid" | "markov" | "block_repeat",
//    "alphabet_size": A, "order": k, "transitions": [[...], ...],
//    "dither": d, "repeat": v,
//    "codebook": {"ell": l, "rate": R, "words": [ints]},
//    "seed": u64}
// "dither" wraps markov/iid models in the noise channel and sets the
// block-repeat rate directly. "seed" is provenance metadata and is carried
// through round trips untouched.
SourcePtr parse_source_spec(const std::string& json_text);

std::string serialize_source_spec(const SourceModel& model,
                                  std::uint64_t seed = 0);

// FNV-1a over the canonical (sorted-key, compact) JSON form; config hashes
// in reports and CLI output use this.
std::uint64_t hash_json_text(const std::string& json_text);
std::string hash_hex(std::uint64_t h);

}  // namespace uniclass
