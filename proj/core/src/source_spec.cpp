#include "uniclass/source_spec.hpp"

#include <json.hpp>

#include "uniclass/block_repeat.hpp"
#include "uniclass/dither.hpp"
#include "uniclass/errors.hpp"
#include "uniclass/markov.hpp"

namespace uniclass {

using nlohmann::json;

namespace {

json parse_or_throw(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InvalidSpec("malformed JSON");
  if (!j.is_object()) throw InvalidSpec("source spec must be a JSON object");
  return j;
}

SourcePtr build_markov_like(const json& j, int order) {
  const int a = j.value("alphabet_size", 2);
  if (!j.contains("transitions") || !j["transitions"].is_array())
    throw InvalidSpec("markov/iid spec needs a transitions array");
  std::vector<std::vector<double>> rows;
  for (const auto& row : j["transitions"]) {
    if (!row.is_array()) throw InvalidSpec("transition rows must be arrays");
    rows.push_back(row.get<std::vector<double>>());
  }
  SourcePtr model =
      std::make_shared<MarkovSource>(Alphabet{a}, order, std::move(rows));
  const double rate = j.value("dither", 0.0);
  return rate == 0.0 ? model : dither(model, rate);
}

SourcePtr build_block_repeat(const json& j) {
  if (!j.contains("codebook") || !j["codebook"].is_object())
    throw InvalidSpec("block_repeat spec needs a codebook object");
  const json& cb = j["codebook"];
  CyclicCodebook book;
  book.ell = cb.value("ell", 0);
  book.rate = cb.value("rate", 0.0);
  if (!cb.contains("words") || !cb["words"].is_array())
    throw InvalidSpec("codebook needs a words array");
  for (const auto& w : cb["words"])
    book.words.push_back(w.get<std::uint32_t>());
  if (book.ell < 2) throw InvalidSpec("codebook ell must be >= 2");
  const std::uint32_t limit = std::uint32_t(1) << book.ell;
  for (std::uint32_t w : book.words)
    if (w >= limit) throw InvalidSpec("codebook word wider than ell bits");
  if (!book.closed_under_shift())
    throw InvalidSpec("codebook is not closed under cyclic shifts");
  const int cap = j.value("enumeration_cap", -1);
  return std::make_shared<BlockRepeatSource>(
      std::move(book), j.value("dither", 0.0), j.value("repeat", 1), cap);
}

}  // namespace

SourcePtr parse_source_spec(const std::string& json_text) {
  const json j = parse_or_throw(json_text);
  const std::string type = j.value("type", "");
  if (type == "iid") return build_markov_like(j, 0);
  if (type == "markov") return build_markov_like(j, j.value("order", 1));
  if (type == "block_repeat") return build_block_repeat(j);
  throw InvalidSpec("unknown source type '" + type + "'");
}

std::string serialize_source_spec(const SourceModel& model,
                                  std::uint64_t seed) {
  json j;
  j["seed"] = seed;
  if (const auto* m = dynamic_cast<const MarkovSource*>(&model)) {
    const int a = m->alphabet().size;
    j["type"] = m->order() == 0 ? "iid" : "markov";
    j["alphabet_size"] = a;
    if (m->order() > 0) j["order"] = m->order();
    std::size_t contexts = 1;
    for (int i = 0; i < m->order(); ++i) contexts *= a;
    json rows = json::array();
    for (std::size_t c = 0; c < contexts; ++c) {
      json row = json::array();
      for (int s = 0; s < a; ++s)
        row.push_back(m->transition(c, static_cast<Symbol>(s)));
      rows.push_back(std::move(row));
    }
    j["transitions"] = std::move(rows);
    j["dither"] = 0.0;
  } else if (const auto* d = dynamic_cast<const DitheredMarkov*>(&model)) {
    j = json::parse(serialize_source_spec(*d->inner(), seed));
    j["dither"] = d->rate();
  } else if (const auto* b = dynamic_cast<const BlockRepeatSource*>(&model)) {
    j["type"] = "block_repeat";
    j["dither"] = b->dither_rate();
    j["repeat"] = b->repeat();
    j["enumeration_cap"] = b->enumeration_cap();
    j["codebook"] = {{"ell", b->codebook().ell},
                     {"rate", b->codebook().rate},
                     {"words", b->codebook().words}};
  } else {
    throw InvalidSpec("cannot serialize source kind " + model.describe());
  }
  return j.dump(2);
}

std::uint64_t hash_json_text(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  const std::string canonical = j.is_discarded() ? json_text : j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace uniclass
