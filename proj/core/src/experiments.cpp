#include "uniclass/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <string_view>
#include <thread>

#include <json.hpp>

#include "uniclass/block_repeat.hpp"
#include "uniclass/codebook.hpp"
#include "uniclass/divergence.hpp"
#include "uniclass/errors.hpp"
#include "uniclass/io.hpp"
#include "uniclass/rng.hpp"
#include "uniclass/source_spec.hpp"
#include "uniclass/version.hpp"

namespace uniclass {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

constexpr double kWilsonZ = 1.959963984540054;
constexpr long kChunk = 25;  // trials per worker task

std::uint64_t cell_hash(const TrainingLayout& layout, ClassifierKind classifier,
                        PairKind kind) {
  const std::string key = std::to_string(layout.n_bar()) + "|" +
                          std::to_string(layout.K) + "|" +
                          std::to_string(layout.N) + "|" +
                          std::to_string(layout.k0) + "|" +
                          to_string(classifier) + "|" + to_string(kind);
  return fnv1a(key);
}

struct LabeledPair {
  SourcePtr x;
  SourcePtr y;
  TruthLabel label = TruthLabel::SameMarginal;
};

struct CellPlan {
  TrainingLayout layout;
  ClassifierKind classifier = ClassifierKind::ML;
  PairKind kind = PairKind::Same;
  ClassifierParams params;
  int ml_n = 64;
  std::uint64_t cell_id = 0;
  const std::vector<LabeledPair>* pairs = nullptr;
};

struct CellTally {
  long errors = 0;
  long gray = 0;
  long effective = 0;
  std::vector<long> pair_errors;
  std::vector<long> pair_effective;
};

void run_range(const CellPlan& plan, long t_begin, long t_end,
               std::uint64_t master, CellTally& tally,
               std::vector<Symbol>& xbuf, std::vector<Symbol>& ybuf) {
  const auto& pairs = *plan.pairs;
  const std::size_t n_bar = plan.layout.n_bar();
  for (long t = t_begin; t < t_end; ++t) {
    const std::size_t slot = static_cast<std::size_t>(t) % pairs.size();
    const LabeledPair& pair = pairs[slot];
    if (pair.label == TruthLabel::GrayZone) {
      ++tally.gray;
      continue;
    }
    Decision decision;
    switch (plan.classifier) {
      case ClassifierKind::Const0:
        decision = {0, 0.0, plan.params.delta_crit / 2.0};
        break;
      case ClassifierKind::Const1:
        decision = {1, 0.0, plan.params.delta_crit / 2.0};
        break;
      case ClassifierKind::ML: {
        Rng rng(derive_seed(master, plan.cell_id,
                            static_cast<std::uint64_t>(t)));
        xbuf.resize(n_bar);
        pair.x->sample_into(xbuf, rng);
        const std::size_t z_len =
            std::min(static_cast<std::size_t>(plan.ml_n), n_bar);
        decision = ml_classify(*pair.x, *pair.y,
                               SymbolSpan(xbuf.data(), z_len),
                               plan.params.delta_crit);
        break;
      }
      case ClassifierKind::ESC:
      case ClassifierKind::VL: {
        Rng rng(derive_seed(master, plan.cell_id,
                            static_cast<std::uint64_t>(t)));
        xbuf.resize(n_bar);
        ybuf.resize(n_bar);
        pair.x->sample_into(xbuf, rng);
        pair.y->sample_into(ybuf, rng);
        const SymbolSpan xs(xbuf.data(), n_bar);
        const SymbolSpan ys(ybuf.data(), n_bar);
        decision = plan.classifier == ClassifierKind::ESC
                       ? esc_classify(xs, ys, plan.params,
                                      pair.x->alphabet())
                       : vl_classify(xs, ys, plan.params,
                                     pair.x->alphabet());
        break;
      }
    }
    if (classify_error_event(decision, pair.label) == ErrorOutcome::Error) {
      ++tally.errors;
      ++tally.pair_errors[slot];
    }
    ++tally.effective;
    ++tally.pair_effective[slot];
  }
}

std::vector<CellTally> run_cells(const std::vector<CellPlan>& plans,
                                 long trials, std::uint64_t master,
                                 int threads) {
  std::vector<CellTally> totals(plans.size());
  for (std::size_t c = 0; c < plans.size(); ++c) {
    totals[c].pair_errors.assign(plans[c].pairs->size(), 0);
    totals[c].pair_effective.assign(plans[c].pairs->size(), 0);
  }

  struct Task {
    std::size_t cell;
    long t_begin;
    long t_end;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < plans.size(); ++c)
    for (long t = 0; t < trials; t += kChunk)
      tasks.push_back({c, t, std::min(trials, t + kChunk)});
  if (tasks.empty()) return totals;

  std::size_t workers =
      threads > 0 ? static_cast<std::size_t>(threads)
                  : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, tasks.size());

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex merge_mutex;
  std::exception_ptr failure;

  auto work = [&] {
    std::vector<Symbol> xbuf, ybuf;
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      const CellPlan& plan = plans[task.cell];
      CellTally part;
      part.pair_errors.assign(plan.pairs->size(), 0);
      part.pair_effective.assign(plan.pairs->size(), 0);
      try {
        run_range(plan, task.t_begin, task.t_end, master, part, xbuf, ybuf);
      } catch (...) {
        std::lock_guard<std::mutex> lock(merge_mutex);
        if (!failure) failure = std::current_exception();
        stop.store(true, std::memory_order_relaxed);
        return;
      }
      std::lock_guard<std::mutex> lock(merge_mutex);
      CellTally& total = totals[task.cell];
      total.errors += part.errors;
      total.gray += part.gray;
      total.effective += part.effective;
      for (std::size_t s = 0; s < part.pair_errors.size(); ++s) {
        total.pair_errors[s] += part.pair_errors[s];
        total.pair_effective[s] += part.pair_effective[s];
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return totals;
}

CellResult make_result(const CellPlan& plan, const CellTally& tally,
                       std::uint64_t master, std::size_t n0) {
  CellResult r;
  r.layout = plan.layout;
  r.classifier = plan.classifier;
  r.pair_kind = plan.kind;
  r.trials = tally.effective;
  r.gray_excluded = tally.gray;
  r.lambda_hat = tally.effective > 0
                     ? static_cast<double>(tally.errors) / tally.effective
                     : 0.0;
  const WilsonInterval ci = wilson_interval(tally.errors, tally.effective);
  r.ci_lo = ci.lo;
  r.ci_hi = ci.hi;
  r.seed = master;
  r.n0_threshold = n0;
  double worst = 0.0;
  for (std::size_t s = 0; s < tally.pair_errors.size(); ++s)
    if (tally.pair_effective[s] > 0)
      worst = std::max(worst, static_cast<double>(tally.pair_errors[s]) /
                                  tally.pair_effective[s]);
  r.empirical_max = worst;
  return r;
}

ClassifierParams cell_params(const ExperimentConfig& config,
                             const TrainingLayout& layout) {
  ClassifierParams p;
  p.delta_crit = config.delta_crit;
  p.K = layout.K;
  p.N = layout.N;
  p.k0 = layout.k0;
  p.eps0 = config.eps0;
  p.delta_source = config.delta_source;
  p.rate = config.rate;
  return p;
}

// Refuse misconfigured cells before any worker starts.
void validate_cell(const CellPlan& plan) {
  const std::string where = " (cell " + std::to_string(plan.layout.n_bar()) +
                            "/" + to_string(plan.classifier) + "/" +
                            to_string(plan.kind) + ")";
  try {
    if (plan.classifier == ClassifierKind::ESC) {
      const int n = plan.params.esc_n();
      if (n < 1)
        throw SequenceTooShort("esc_n fell below 1 at n_bar " +
                               std::to_string(plan.layout.n_bar()));
      if (static_cast<std::size_t>(n) > plan.params.N)
        throw SequenceTooShort("esc_n exceeds the block length");
    } else if (plan.classifier == ClassifierKind::VL) {
      const int l_max = plan.params.vl_l_max();
      if (l_max < 1) throw SequenceTooShort("vl_l_max fell below 1");
      if (plan.params.N < static_cast<std::size_t>(l_max) + 1)
        throw SequenceTooShort("block length must exceed l_max");
    } else if (plan.classifier == ClassifierKind::ML) {
      if (plan.ml_n < 1) throw InvalidSpec("ml_n must be >= 1");
    }
  } catch (const Error& e) {
    throw Error(e.code(), e.what() + where);
  }
}

// Exact per-block log2 probabilities for every binary block of length n.
std::vector<double> block_table(const SourceModel& model, int n) {
  std::vector<double> table(std::size_t(1) << n);
  std::vector<Symbol> buf(static_cast<std::size_t>(n));
  for (std::size_t z = 0; z < table.size(); ++z) {
    for (int i = 0; i < n; ++i)
      buf[static_cast<std::size_t>(i)] =
          static_cast<Symbol>((z >> (n - 1 - i)) & 1u);
    table[z] = model.log2_prob(buf);
  }
  return table;
}

double table_kl(const std::vector<double>& lp, const std::vector<double>& lq,
                int n) {
  double sum = 0.0;
  for (std::size_t z = 0; z < lp.size(); ++z) {
    const double p = std::exp2(lp[z]);
    if (p > 0.0) sum += p * (lp[z] - lq[z]);
  }
  return sum / n;
}

struct PairSet {
  std::vector<LabeledPair> same;
  std::vector<LabeledPair> different;
  long gray_redrawn = 0;
};

PairSet family_pairs(const ExperimentConfig& config) {
  const FamilySpec& spec = *config.family;
  if (config.truth_n > 20)
    throw InvalidSpec("family truth labels enumerate 2^truth_n blocks; "
                      "truth_n must be <= 20");
  if (config.truth_n > 2 * spec.ell)
    throw InvalidSpec("truth_n exceeds the family enumeration cap 2*ell");
  const std::vector<SourcePtr> members = build_family(spec);

  std::vector<std::vector<double>> tables;
  tables.reserve(members.size());
  for (const SourcePtr& m : members)
    tables.push_back(block_table(*m, config.truth_n));

  PairSet out;
  for (const SourcePtr& m : members)
    out.same.push_back({m, m, TruthLabel::SameMarginal});
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = 0; j < members.size(); ++j) {
      if (i == j) continue;
      const double d = table_kl(tables[i], tables[j], config.truth_n);
      if (d > config.delta_crit) {
        out.different.push_back(
            {members[i], members[j], TruthLabel::DivergentAtLeastDelta});
      } else if (config.gray_zone == "forbid") {
        throw GrayZonePair("family members " + std::to_string(i) + " and " +
                           std::to_string(j) + " diverge by only " +
                           std::to_string(d) + " bits");
      } else {
        ++out.gray_redrawn;
      }
    }
  if (out.different.empty())
    throw ConstructionFailed(
        "no family pair exceeds delta_crit; family is unusable");
  return out;
}

PairSet explicit_pairs(const ExperimentConfig& config) {
  PairSet out;
  std::size_t index = 0;
  for (const auto& [x_text, y_text] : config.pair_specs) {
    const SourcePtr x = parse_source_spec(x_text);
    const SourcePtr y = y_text == x_text ? x : parse_source_spec(y_text);
    if (x->alphabet().size != y->alphabet().size)
      throw InvalidSpec("pair " + std::to_string(index) +
                        " mixes alphabet sizes");
    const std::uint64_t seed =
        derive_seed(config.master_seed, fnv1a("truth-label"), index);
    const TruthLabel label = pair_truth_label(x, y, config.truth_n,
                                              config.delta_crit, seed);
    switch (label) {
      case TruthLabel::SameMarginal:
        out.same.push_back({x, y, label});
        break;
      case TruthLabel::DivergentAtLeastDelta:
        out.different.push_back({x, y, label});
        break;
      case TruthLabel::GrayZone:
        if (config.gray_zone == "forbid")
          throw GrayZonePair("pair " + std::to_string(index) +
                             " lies in the gray zone");
        out.different.push_back({x, y, label});
        break;
    }
    ++index;
  }
  return out;
}

const char* kCsvHeader =
    "n_bar,K,N,k0,classifier,pair_kind,lambda_hat,ci_lo,ci_hi,trials,"
    "gray_excluded,seed,n0_threshold";

}  // namespace

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::ML: return "ml";
    case ClassifierKind::ESC: return "esc";
    case ClassifierKind::VL: return "vl";
    case ClassifierKind::Const0: return "const0";
    case ClassifierKind::Const1: return "const1";
  }
  return "ml";
}

std::string to_string(PairKind kind) {
  return kind == PairKind::Same ? "same" : "different";
}

ClassifierKind parse_classifier_kind(const std::string& name) {
  if (name == "ml") return ClassifierKind::ML;
  if (name == "esc") return ClassifierKind::ESC;
  if (name == "vl") return ClassifierKind::VL;
  if (name == "const0") return ClassifierKind::Const0;
  if (name == "const1") return ClassifierKind::Const1;
  throw InvalidSpec("unknown classifier \"" + name +
                    "\"; expected ml, esc, vl, const0, or const1");
}

PairKind parse_pair_kind(const std::string& name) {
  if (name == "same") return PairKind::Same;
  if (name == "different") return PairKind::Different;
  throw InvalidSpec("unknown pair kind \"" + name +
                    "\"; expected same or different");
}

std::size_t FamilySpec::n0_threshold() const {
  return static_cast<std::size_t>(
      std::llround(std::exp2(rate * static_cast<double>(ell))));
}

std::vector<SourcePtr> build_family(const FamilySpec& spec) {
  if (spec.members < 1) throw InvalidSpec("family needs at least one member");
  const std::vector<CyclicCodebook> books = build_cyclic_codebooks(
      spec.ell, spec.rate, spec.min_dist_frac, spec.members, spec.build_seed);
  std::vector<SourcePtr> members;
  members.reserve(books.size());
  for (const CyclicCodebook& book : books)
    members.push_back(
        std::make_shared<BlockRepeatSource>(book, spec.dither, spec.repeat));
  return members;
}

WilsonInterval wilson_interval(long errors, long trials) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kWilsonZ / denom *
                      std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  // Containment of p is part of the contract; rounding can leave the raw
  // endpoints a few ulps inside it at p == 0 or p == 1.
  return {std::max(0.0, std::min(center - half, p)),
          std::min(1.0, std::max(center + half, p))};
}

TruthLabel pair_truth_label(const SourcePtr& x, const SourcePtr& y,
                            int truth_n, double delta_crit,
                            std::uint64_t seed, double* divergence_out) {
  if (divergence_out) *divergence_out = 0.0;
  if (x.get() == y.get()) return TruthLabel::SameMarginal;
  if (truth_n < 1) throw InvalidSpec("truth_n must be >= 1");

  const double states =
      std::pow(static_cast<double>(x->alphabet().size), truth_n);
  const DivMethod method =
      states <= 1048576.0 ? DivMethod::Exact : DivMethod::MonteCarlo;
  double d;
  try {
    d = kl_divergence_n(*x, *y, truth_n, method, 20000, seed).value;
  } catch (const ZeroQProbability&) {
    d = std::numeric_limits<double>::infinity();
  }
  if (divergence_out) *divergence_out = d;
  if (d <= 1e-12) return TruthLabel::SameMarginal;
  if (d >= delta_crit) return TruthLabel::DivergentAtLeastDelta;
  return TruthLabel::GrayZone;
}

CellResult estimate_error(const SourcePtr& x, const SourcePtr& y,
                          ClassifierKind classifier,
                          const ClassifierParams& params, long trials,
                          std::uint64_t seed, int ml_n, int truth_n) {
  if (trials < 1) throw InvalidSpec("trials must be >= 1");
  double divergence = 0.0;
  const TruthLabel label = pair_truth_label(
      x, y, truth_n, params.delta_crit,
      derive_seed(seed, fnv1a("truth-label"), 0), &divergence);
  if (label == TruthLabel::GrayZone)
    throw GrayZonePair("pair diverges by " + std::to_string(divergence) +
                       " bits, inside (0, " +
                       std::to_string(params.delta_crit) + ")");

  std::vector<LabeledPair> pairs{{x, y, label}};
  CellPlan plan;
  plan.layout = {params.K, params.N, params.k0};
  plan.classifier = classifier;
  plan.kind = label == TruthLabel::SameMarginal ? PairKind::Same
                                                : PairKind::Different;
  plan.params = params;
  plan.ml_n = ml_n;
  plan.cell_id = cell_hash(plan.layout, classifier, plan.kind);
  plan.pairs = &pairs;
  validate_cell(plan);

  const std::vector<CellTally> totals =
      run_cells({plan}, trials, seed, 1);
  return make_result(plan, totals[0], seed, 0);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  // An empty grid is legal and yields a cell-free report (header-only CSV).
  if (config.trials < 1) throw InvalidSpec("trials must be >= 1");
  if (config.classifiers.empty())
    throw InvalidSpec("classifiers must not be empty");
  if (!config.family && config.pair_specs.empty())
    throw InvalidSpec("config needs source pairs or a family");

  const PairSet pairs =
      config.family ? family_pairs(config) : explicit_pairs(config);
  const std::size_t n0 =
      config.family ? config.family->n0_threshold() : std::size_t(0);

  std::vector<CellPlan> plans;
  for (const TrainingLayout& layout : config.grid)
    for (ClassifierKind classifier : config.classifiers)
      for (PairKind kind : config.pair_kinds) {
        const std::vector<LabeledPair>& list =
            kind == PairKind::Same ? pairs.same : pairs.different;
        if (list.empty()) continue;
        CellPlan plan;
        plan.layout = layout;
        plan.classifier = classifier;
        plan.kind = kind;
        plan.params = cell_params(config, layout);
        plan.ml_n = config.ml_n;
        plan.cell_id = cell_hash(layout, classifier, kind);
        plan.pairs = &list;
        validate_cell(plan);
        plans.push_back(plan);
      }

  const std::vector<CellTally> totals =
      run_cells(plans, config.trials, config.master_seed, config.threads);

  ExperimentReport report;
  report.kind = config.kind;
  report.master_seed = config.master_seed;
  report.config_hash = hash_hex(hash_json_text(
      config.config_text.empty() ? "{}" : config.config_text));
  report.n0_threshold = n0;
  report.gray_redrawn = pairs.gray_redrawn;
  report.cells.reserve(plans.size());
  for (std::size_t c = 0; c < plans.size(); ++c)
    report.cells.push_back(
        make_result(plans[c], totals[c], config.master_seed, n0));
  return report;
}

ExperimentReport threshold_sweep(const ExperimentConfig& config) {
  if (!config.family)
    throw InvalidSpec("threshold_sweep needs a family spec");
  if (config.grid.empty()) throw InvalidSpec("grid must not be empty");
  const std::size_t n0 = config.family->n0_threshold();
  std::size_t lo = std::numeric_limits<std::size_t>::max();
  std::size_t hi = 0;
  for (const TrainingLayout& layout : config.grid) {
    lo = std::min(lo, layout.n_bar());
    hi = std::max(hi, layout.n_bar());
  }
  if (!(lo < n0 && n0 < hi))
    throw InvalidSpec("threshold_sweep grid must straddle the threshold "
                      "length " +
                      std::to_string(n0));
  return run_experiment(config);
}

ExperimentReport esc_vs_vl(const ExperimentConfig& config) {
  if (!config.family) throw InvalidSpec("esc_vs_vl needs a family spec");
  const auto has = [&](ClassifierKind k) {
    return std::find(config.classifiers.begin(), config.classifiers.end(),
                     k) != config.classifiers.end();
  };
  if (!has(ClassifierKind::ESC) || !has(ClassifierKind::VL))
    throw InvalidSpec("esc_vs_vl needs both esc and vl in classifiers");
  return run_experiment(config);
}

std::string report_to_csv(const ExperimentReport& report) {
  std::string out = kCsvHeader;
  out += '\n';
  char row[512];
  for (const CellResult& cell : report.cells) {
    std::snprintf(
        row, sizeof row, "%zu,%zu,%zu,%zu,%s,%s,%.17g,%.17g,%.17g,%ld,%ld,"
        "%llu,%zu\n",
        cell.layout.n_bar(), cell.layout.K, cell.layout.N, cell.layout.k0,
        to_string(cell.classifier).c_str(), to_string(cell.pair_kind).c_str(),
        cell.lambda_hat, cell.ci_lo, cell.ci_hi, cell.trials,
        cell.gray_excluded, static_cast<unsigned long long>(cell.seed),
        cell.n0_threshold);
    out += row;
  }
  return out;
}

std::string report_to_json(const ExperimentReport& report) {
  json j;
  j["tool_version"] = version_string;
  j["kind"] = report.kind;
  j["seed"] = report.master_seed;
  j["config_hash"] = report.config_hash;
  j["n0_threshold"] = report.n0_threshold;
  j["gray_redrawn"] = report.gray_redrawn;
  j["aggregation"] =
      "cell rates average over the sampled pair rotation; empirical_max is "
      "the largest per-pair rate over the sampled pairs";
  json cells = json::array();
  for (const CellResult& cell : report.cells) {
    json c;
    c["n_bar"] = cell.layout.n_bar();
    c["K"] = cell.layout.K;
    c["N"] = cell.layout.N;
    c["k0"] = cell.layout.k0;
    c["classifier"] = to_string(cell.classifier);
    c["pair_kind"] = to_string(cell.pair_kind);
    c["lambda_hat"] = cell.lambda_hat;
    c["ci_lo"] = cell.ci_lo;
    c["ci_hi"] = cell.ci_hi;
    c["trials"] = cell.trials;
    c["gray_excluded"] = cell.gray_excluded;
    c["seed"] = cell.seed;
    c["n0_threshold"] = cell.n0_threshold;
    c["empirical_max"] = cell.empirical_max;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

ExperimentReport parse_report_json(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw InvalidSpec("malformed report JSON");
  try {
    ExperimentReport report;
    report.kind = j.at("kind").get<std::string>();
    report.master_seed = j.at("seed").get<std::uint64_t>();
    report.config_hash = j.at("config_hash").get<std::string>();
    report.n0_threshold = j.at("n0_threshold").get<std::size_t>();
    report.gray_redrawn = j.at("gray_redrawn").get<long>();
    for (const json& c : j.at("cells")) {
      CellResult cell;
      cell.layout.K = c.at("K").get<std::size_t>();
      cell.layout.N = c.at("N").get<std::size_t>();
      cell.layout.k0 = c.at("k0").get<std::size_t>();
      if (c.at("n_bar").get<std::size_t>() != cell.layout.n_bar())
        throw InvalidSpec("report cell n_bar disagrees with its layout");
      cell.classifier =
          parse_classifier_kind(c.at("classifier").get<std::string>());
      cell.pair_kind = parse_pair_kind(c.at("pair_kind").get<std::string>());
      cell.lambda_hat = c.at("lambda_hat").get<double>();
      cell.ci_lo = c.at("ci_lo").get<double>();
      cell.ci_hi = c.at("ci_hi").get<double>();
      cell.trials = c.at("trials").get<long>();
      cell.gray_excluded = c.at("gray_excluded").get<long>();
      cell.seed = c.at("seed").get<std::uint64_t>();
      cell.n0_threshold = c.at("n0_threshold").get<std::size_t>();
      cell.empirical_max = c.value("empirical_max", 0.0);
      report.cells.push_back(std::move(cell));
    }
    return report;
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("report JSON: ") + e.what());
  }
}

void emit_report(const ExperimentReport& report, const std::string& format,
                 const std::string& path) {
  if (format == "csv") {
    write_file_atomic(path, report_to_csv(report));
  } else if (format == "json") {
    write_file_atomic(path, report_to_json(report));
  } else {
    throw InvalidSpec("unknown report format \"" + format +
                      "\"; expected csv or json");
  }
}

std::string CellSelector::describe() const {
  std::string out = "{";
  const auto add = [&out](const std::string& key, const std::string& value) {
    if (out.size() > 1) out += ", ";
    out += key + "=" + value;
  };
  if (n_bar) add("n_bar", std::to_string(*n_bar));
  if (K) add("K", std::to_string(*K));
  if (N) add("N", std::to_string(*N));
  if (k0) add("k0", std::to_string(*k0));
  if (classifier) add("classifier", to_string(*classifier));
  if (pair_kind) add("pair_kind", to_string(*pair_kind));
  out += "}";
  return out;
}

namespace {

bool selector_matches(const CellSelector& sel, const CellResult& cell) {
  if (sel.n_bar && *sel.n_bar != cell.layout.n_bar()) return false;
  if (sel.K && *sel.K != cell.layout.K) return false;
  if (sel.N && *sel.N != cell.layout.N) return false;
  if (sel.k0 && *sel.k0 != cell.layout.k0) return false;
  if (sel.classifier && *sel.classifier != cell.classifier) return false;
  if (sel.pair_kind && *sel.pair_kind != cell.pair_kind) return false;
  return true;
}

// nullptr plus a reason when the selector does not pick exactly one cell.
const CellResult* select_one(const ExperimentReport& report,
                             const CellSelector& sel, std::string* reason) {
  const CellResult* found = nullptr;
  int count = 0;
  for (const CellResult& cell : report.cells)
    if (selector_matches(sel, cell)) {
      found = &cell;
      ++count;
    }
  if (count == 1) return found;
  *reason = sel.describe() + " matched " + std::to_string(count) + " cells";
  return nullptr;
}

}  // namespace

std::vector<AssertionOutcome> check_assertions(
    const ExperimentReport& report, const std::vector<Assertion>& assertions) {
  std::vector<AssertionOutcome> outcomes;
  outcomes.reserve(assertions.size());
  for (const Assertion& a : assertions) {
    AssertionOutcome outcome;
    outcome.description = a.metric + " " + a.where.describe() +
                          (a.metric == "lambda_diff"
                               ? " minus " + a.minus.describe()
                               : std::string()) +
                          " " + a.op + " " + std::to_string(a.value);
    std::string reason;
    const CellResult* first = select_one(report, a.where, &reason);
    const CellResult* second =
        a.metric == "lambda_diff" && first
            ? select_one(report, a.minus, &reason)
            : nullptr;
    if (!first || (a.metric == "lambda_diff" && !second)) {
      outcome.actual = std::numeric_limits<double>::quiet_NaN();
      outcome.passed = false;
      outcome.description += " [" + reason + "]";
      outcomes.push_back(std::move(outcome));
      continue;
    }
    outcome.actual = a.metric == "lambda_diff"
                         ? first->lambda_hat - second->lambda_hat
                         : first->lambda_hat;
    outcome.passed = a.op == "ge" ? outcome.actual >= a.value
                                  : outcome.actual <= a.value;
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

namespace {

void require_keys(const json& j, const char* context,
                  std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        ok = true;
        break;
      }
    if (!ok)
      throw InvalidSpec(std::string("unknown key \"") + item.key() +
                        "\" in " + context);
  }
}

CellSelector parse_selector(const json& j) {
  if (!j.is_object()) throw InvalidSpec("selector must be a JSON object");
  require_keys(j, "selector",
               {"n_bar", "K", "N", "k0", "classifier", "pair_kind"});
  CellSelector sel;
  if (j.contains("n_bar")) sel.n_bar = j.at("n_bar").get<std::size_t>();
  if (j.contains("K")) sel.K = j.at("K").get<std::size_t>();
  if (j.contains("N")) sel.N = j.at("N").get<std::size_t>();
  if (j.contains("k0")) sel.k0 = j.at("k0").get<std::size_t>();
  if (j.contains("classifier"))
    sel.classifier =
        parse_classifier_kind(j.at("classifier").get<std::string>());
  if (j.contains("pair_kind"))
    sel.pair_kind = parse_pair_kind(j.at("pair_kind").get<std::string>());
  return sel;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw InvalidSpec("experiment config must be a JSON object");
  try {
    require_keys(j, "experiment config",
                 {"kind", "pairs", "family", "grid", "classifiers",
                  "pair_kinds", "trials", "seed", "delta_crit", "eps0",
                  "delta_source", "rate", "ml_n", "truth_n", "threads",
                  "gray_zone", "assertions"});
    ExperimentConfig config;
    config.config_text = json_text;
    config.kind = j.value("kind", std::string("error_grid"));
    if (config.kind != "error_grid" && config.kind != "threshold_sweep" &&
        config.kind != "esc_vs_vl")
      throw InvalidSpec("unknown experiment kind \"" + config.kind + "\"");

    if (j.contains("pairs")) {
      for (const json& p : j.at("pairs")) {
        require_keys(p, "pair entry", {"x", "y"});
        config.pair_specs.emplace_back(p.at("x").dump(), p.at("y").dump());
      }
    }
    if (j.contains("family")) {
      const json& f = j.at("family");
      require_keys(f, "family spec",
                   {"ell", "rate", "min_dist_frac", "dither", "members",
                    "repeat", "build_seed"});
      FamilySpec spec;
      spec.ell = f.value("ell", spec.ell);
      spec.rate = f.value("rate", spec.rate);
      spec.min_dist_frac = f.value("min_dist_frac", spec.min_dist_frac);
      spec.dither = f.value("dither", spec.dither);
      spec.members = f.value("members", spec.members);
      spec.repeat = f.value("repeat", spec.repeat);
      spec.build_seed = f.value("build_seed", spec.build_seed);
      config.family = spec;
      // the classifier's declared class parameters default to the family's
      config.rate = spec.rate;
      config.delta_source = spec.dither > 0.0 ? spec.dither : 0.05;
    }

    for (const json& g : j.value("grid", json::array())) {
      require_keys(g, "grid entry", {"K", "N", "k0"});
      TrainingLayout layout;
      layout.K = g.at("K").get<std::size_t>();
      layout.N = g.at("N").get<std::size_t>();
      layout.k0 = g.value("k0", std::size_t(0));
      if (layout.K < 1 || layout.N < 1)
        throw InvalidSpec("grid entries need K >= 1 and N >= 1");
      config.grid.push_back(layout);
    }
    for (const json& c : j.value("classifiers", json::array()))
      config.classifiers.push_back(
          parse_classifier_kind(c.get<std::string>()));
    if (j.contains("pair_kinds")) {
      config.pair_kinds.clear();
      for (const json& p : j.at("pair_kinds"))
        config.pair_kinds.push_back(parse_pair_kind(p.get<std::string>()));
    }

    config.trials = j.value("trials", config.trials);
    if (config.trials < 1) throw InvalidSpec("trials must be >= 1");
    config.master_seed = j.value("seed", config.master_seed);
    config.delta_crit = j.value("delta_crit", config.delta_crit);
    if (!(config.delta_crit > 0.0))
      throw InvalidSpec("delta_crit must be > 0");
    config.eps0 = j.value("eps0", config.eps0);
    if (!(config.eps0 > 0.0)) throw InvalidSpec("eps0 must be > 0");
    config.delta_source = j.value("delta_source", config.delta_source);
    if (!(config.delta_source > 0.0 && config.delta_source < 1.0))
      throw InvalidSpec("delta_source must be in (0, 1)");
    config.rate = j.value("rate", config.rate);
    if (!(config.rate > 0.0)) throw InvalidSpec("rate must be > 0");
    config.ml_n = j.value("ml_n", config.ml_n);
    if (config.ml_n < 1) throw InvalidSpec("ml_n must be >= 1");
    config.truth_n = j.value("truth_n", config.truth_n);
    if (config.truth_n < 1) throw InvalidSpec("truth_n must be >= 1");
    config.threads = j.value("threads", config.threads);
    if (config.threads < 0) throw InvalidSpec("threads must be >= 0");
    config.gray_zone = j.value("gray_zone", config.gray_zone);
    if (config.gray_zone != "exclude" && config.gray_zone != "forbid")
      throw InvalidSpec("gray_zone must be exclude or forbid");

    for (const json& a : j.value("assertions", json::array())) {
      require_keys(a, "assertion", {"metric", "where", "minus", "op",
                                    "value"});
      Assertion assertion;
      assertion.metric = a.value("metric", assertion.metric);
      if (assertion.metric != "lambda_hat" &&
          assertion.metric != "lambda_diff")
        throw InvalidSpec("assertion metric must be lambda_hat or "
                          "lambda_diff");
      assertion.where = parse_selector(a.at("where"));
      if (assertion.metric == "lambda_diff")
        assertion.minus = parse_selector(a.at("minus"));
      assertion.op = a.value("op", assertion.op);
      if (assertion.op != "ge" && assertion.op != "le")
        throw InvalidSpec("assertion op must be ge or le");
      assertion.value = a.at("value").get<double>();
      config.assertions.push_back(std::move(assertion));
    }
    return config;
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("experiment config: ") + e.what());
  }
}

}  // namespace uniclass
