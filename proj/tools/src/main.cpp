// uniclass: command line front end for the classification library.
// Exit codes: 0 success, 1 validation or usage error (single line
// "error[<code>]: <message>" on stderr), 2 experiment assertion failure.
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uniclass/block_repeat.hpp"
#include "uniclass/classifiers.hpp"
#include "uniclass/codebook.hpp"
#include "uniclass/dither.hpp"
#include "uniclass/divergence.hpp"
#include "uniclass/markov.hpp"
#include "uniclass/errors.hpp"
#include "uniclass/experiments.hpp"
#include "uniclass/io.hpp"
#include "uniclass/source_spec.hpp"
#include "uniclass/version.hpp"

namespace {

using nlohmann::json;
using namespace uniclass;

struct Output {
  std::string path;    // empty means stdout
  std::string format = "json";
  bool quiet = false;
};

void write_out(const Output& out, const std::string& text) {
  if (out.path.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  write_file_atomic(out.path, text);
  if (!out.quiet) std::fprintf(stderr, "wrote %s\n", out.path.c_str());
}

// Uniform metadata block: every JSON result carries the tool version, a hash
// of the resolved invocation, and the seed that drove any randomness.
void stamp(json& j, const json& invocation, std::uint64_t seed) {
  j["tool_version"] = version_string;
  j["config_hash"] = hash_hex(hash_json_text(invocation.dump()));
  j["seed"] = seed;
}

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> out;
  std::size_t at = 0;
  while (at <= text.size()) {
    std::size_t comma = text.find(',', at);
    if (comma == std::string::npos) comma = text.size();
    try {
      out.push_back(std::stod(text.substr(at, comma - at)));
    } catch (const std::exception&) {
      throw InvalidSpec("cannot parse '" + text + "' as comma separated numbers");
    }
    at = comma + 1;
  }
  return out;
}

// gen-source ------------------------------------------------------------

struct GenSourceArgs {
  std::string type;
  std::string out;
  int alphabet_size = 2;
  std::string probs;
  std::vector<std::string> rows;
  int order = 1;
  double dither = 0.0;
  int ell = 16;
  double rate = 0.5;
  double min_dist_frac = 0.25;
  int members = 1;
  int member_index = 0;
  int repeat = 1;
  std::uint64_t seed = 1;
  bool quiet = false;
};

int run_gen_source(const GenSourceArgs& a) {
  SourcePtr model;
  if (a.type == "iid") {
    if (a.probs.empty()) throw InvalidSpec("iid source needs --probs");
    model = make_iid(Alphabet{a.alphabet_size}, parse_csv_doubles(a.probs));
    if (a.dither > 0) model = dither(model, a.dither);
  } else if (a.type == "markov") {
    if (a.rows.empty()) throw InvalidSpec("markov source needs --row per context");
    std::vector<std::vector<double>> rows;
    for (const auto& r : a.rows) rows.push_back(parse_csv_doubles(r));
    model = std::make_shared<MarkovSource>(Alphabet{a.alphabet_size}, a.order,
                                           std::move(rows));
    if (a.dither > 0) model = dither(model, a.dither);
  } else {
    auto books = build_cyclic_codebooks(a.ell, a.rate, a.min_dist_frac,
                                        a.members, a.seed);
    if (a.member_index < 0 || a.member_index >= int(books.size()))
      throw InvalidSpec("--member-index out of range [0, " +
                        std::to_string(books.size()) + ")");
    model = std::make_shared<BlockRepeatSource>(
        std::move(books[std::size_t(a.member_index)]), a.dither, a.repeat);
  }
  json j = json::parse(serialize_source_spec(*model, a.seed));
  stamp(j, j, a.seed);
  Output out{a.out, "json", a.quiet};
  write_out(out, j.dump(2) + "\n");
  return 0;
}

// sample ----------------------------------------------------------------

int run_sample(const std::string& spec_path, std::size_t len,
               std::uint64_t seed, bool seed_given, const std::string& out,
               bool quiet) {
  if (!seed_given && !quiet)
    std::fprintf(stderr, "no --seed given, using default seed %llu\n",
                 (unsigned long long)seed);
  SourcePtr model = parse_source_spec(read_file(spec_path));
  Sequence x = model->sample(len, seed);
  write_sequence_file(out, x);
  if (!quiet)
    std::fprintf(stderr, "wrote %zu symbols to %s (seed %llu)\n", x.size(),
                 out.c_str(), (unsigned long long)seed);
  return 0;
}

// divergence ------------------------------------------------------------

struct DivergenceArgs {
  std::string kind = "kl";
  std::string p_path, q_path;
  int n = 1;
  std::string method = "exact";
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
  double rate = 0.5;
  double eps0 = 0.25;
  Output out;
};

int run_divergence(const DivergenceArgs& a) {
  const std::string p_text = read_file(a.p_path);
  const std::string q_text = read_file(a.q_path);
  SourcePtr p = parse_source_spec(p_text);
  SourcePtr q = parse_source_spec(q_text);
  DivergenceValue value;
  if (a.kind == "kl") {
    if (a.method != "exact" && a.method != "mc")
      throw InvalidSpec("kl --method must be exact or mc");
    value = kl_divergence_n(
        *p, *q, a.n,
        a.method == "exact" ? DivMethod::Exact : DivMethod::MonteCarlo,
        a.samples, a.seed);
  } else {
    LengthMethod lm = LengthMethod::Auto;
    if (a.method == "exact") lm = LengthMethod::Exact;
    else if (a.method == "mc") lm = LengthMethod::MonteCarlo;
    else if (a.method != "auto")
      throw InvalidSpec("vl --method must be exact, mc, or auto");
    VLLengthParams params;
    params.n = a.n;
    params.rate = a.rate;
    params.eps0 = a.eps0;
    value = vl_divergence_n(*p, *q, params, lm, a.samples, a.seed);
  }
  json invocation = {{"subcommand", "divergence"},
                     {"kind", a.kind},
                     {"n", a.n},
                     {"method", a.method},
                     {"samples", a.samples},
                     {"seed", a.seed},
                     {"rate", a.rate},
                     {"eps0", a.eps0},
                     {"p_hash", hash_hex(hash_json_text(p_text))},
                     {"q_hash", hash_hex(hash_json_text(q_text))}};
  if (a.out.format == "csv") {
    char line[256];
    std::snprintf(line, sizeof line, "kind,n,value_bits_per_symbol,method,std_error\n%s,%d,%.17g,%s,%.17g\n",
                  a.kind.c_str(), a.n, value.value, a.method.c_str(),
                  value.std_error);
    write_out(a.out, line);
    return 0;
  }
  json j = {{"kind", a.kind},
            {"n", a.n},
            {"value_bits_per_symbol", value.value},
            {"method", a.method},
            {"std_error", value.std_error}};
  stamp(j, invocation, a.seed);
  write_out(a.out, j.dump(2) + "\n");
  return 0;
}

// classify --------------------------------------------------------------

struct ClassifyArgs {
  std::string method;
  std::string x_path, y_path;
  std::string params_path;
  std::string p_path, q_path;  // ml reference models
  int ml_len = 64;
  int alphabet_size = 2;
  ClassifierParams params;
  // Which flags were set on the command line; they beat the params file.
  bool has_delta_crit = false, has_K = false, has_N = false, has_k0 = false,
       has_eps0 = false, has_delta_floor = false, has_rate = false;
  Output out;
};

int run_classify(ClassifyArgs& a) {
  json pj = json::object();
  if (!a.params_path.empty()) {
    pj = json::parse(read_file(a.params_path), nullptr, false);
    if (pj.is_discarded() || !pj.is_object())
      throw InvalidSpec("params file must hold a JSON object");
  }
  auto pick_d = [&](const char* key, bool has_flag, double flag_value) {
    return has_flag ? flag_value : pj.value(key, flag_value);
  };
  ClassifierParams p = a.params;
  p.delta_crit = pick_d("delta_crit", a.has_delta_crit, p.delta_crit);
  p.K = std::size_t(pj.value("K", double(p.K)));
  if (a.has_K) p.K = a.params.K;
  p.N = std::size_t(pj.value("N", double(p.N)));
  if (a.has_N) p.N = a.params.N;
  p.k0 = std::size_t(pj.value("k0", double(p.k0)));
  if (a.has_k0) p.k0 = a.params.k0;
  p.eps0 = pick_d("eps0", a.has_eps0, p.eps0);
  p.delta_source = pick_d("delta_floor", a.has_delta_floor, p.delta_source);
  p.rate = pick_d("rate", a.has_rate, p.rate);
  const int alphabet_size = pj.value("alphabet_size", a.alphabet_size);

  const std::string x_bytes = read_file(a.x_path);
  json invocation = {{"subcommand", "classify"},
                     {"method", a.method},
                     {"delta_crit", p.delta_crit},
                     {"K", p.K},
                     {"N", p.N},
                     {"k0", p.k0},
                     {"eps0", p.eps0},
                     {"delta_floor", p.delta_source},
                     {"rate", p.rate},
                     {"alphabet_size", alphabet_size},
                     {"x_hash", hash_hex(hash_json_text(x_bytes))}};

  json j;
  if (a.method == "ml") {
    if (a.p_path.empty() || a.q_path.empty())
      throw InvalidSpec("classify --method ml needs --p and --q source specs");
    const std::string p_text = read_file(a.p_path);
    const std::string q_text = read_file(a.q_path);
    SourcePtr pm = parse_source_spec(p_text);
    SourcePtr qm = parse_source_spec(q_text);
    Sequence x = read_sequence_file(a.x_path, pm->alphabet());
    if (x.size() < std::size_t(a.ml_len))
      throw SequenceTooShort("--x holds " + std::to_string(x.size()) +
                             " symbols, --n asks for " +
                             std::to_string(a.ml_len));
    Decision d = ml_classify(*pm, *qm, x.prefix(std::size_t(a.ml_len)),
                             p.delta_crit);
    invocation["n"] = a.ml_len;
    invocation["p_hash"] = hash_hex(hash_json_text(p_text));
    invocation["q_hash"] = hash_hex(hash_json_text(q_text));
    j = {{"method", "ml"},
         {"verdict", d.verdict},
         {"statistic_bits", d.statistic},
         {"threshold_bits", d.threshold},
         {"n", a.ml_len}};
  } else if (a.method == "esc" || a.method == "vl") {
    if (a.y_path.empty())
      throw InvalidSpec("classify --method " + a.method + " needs --y");
    const Alphabet alphabet{alphabet_size};
    Sequence x = read_sequence_file(a.x_path, alphabet);
    Sequence y = read_sequence_file(a.y_path, alphabet);
    const std::size_t need = p.n_bar();
    if (x.size() < need || y.size() < need)
      throw SequenceTooShort("layout needs " + std::to_string(need) +
                             " symbols, got " + std::to_string(x.size()) +
                             " and " + std::to_string(y.size()));
    const std::string y_bytes = read_file(a.y_path);
    invocation["y_hash"] = hash_hex(hash_json_text(y_bytes));
    Decision d = a.method == "esc"
                     ? esc_classify(x.prefix(need), y.prefix(need), p, alphabet)
                     : vl_classify(x.prefix(need), y.prefix(need), p, alphabet);
    j = {{"method", a.method},
         {"verdict", d.verdict},
         {"statistic_bits", d.statistic},
         {"threshold_bits", d.threshold},
         {"layout",
          {{"K", p.K}, {"N", p.N}, {"k0", p.k0}, {"n_bar", p.n_bar()}}}};
    if (a.method == "esc")
      j["esc_n"] = p.esc_n();
    else
      j["l_max"] = p.vl_l_max();
  } else {
    throw InvalidSpec("unknown classify method '" + a.method + "'");
  }
  if (a.out.format == "csv") {
    char line[256];
    std::snprintf(line, sizeof line,
                  "method,verdict,statistic_bits,threshold_bits\n%s,%d,%.17g,%.17g\n",
                  a.method.c_str(), j["verdict"].get<int>(),
                  j["statistic_bits"].get<double>(),
                  j["threshold_bits"].get<double>());
    write_out(a.out, line);
    return 0;
  }
  stamp(j, invocation, 0);
  write_out(a.out, j.dump(2) + "\n");
  return 0;
}

// experiment ------------------------------------------------------------

int run_experiment_cmd(const std::string& config_path, int threads_override,
                       Output out) {
  ExperimentConfig config = parse_experiment_config(read_file(config_path));
  if (threads_override > 0) config.threads = threads_override;
  ExperimentReport report;
  if (config.kind == "threshold_sweep")
    report = threshold_sweep(config);
  else if (config.kind == "esc_vs_vl")
    report = esc_vs_vl(config);
  else
    report = run_experiment(config);
  const std::string text =
      out.format == "csv" ? report_to_csv(report) : report_to_json(report);
  write_out(out, text);
  if (!out.quiet)
    std::fprintf(stderr, "experiment %s: %zu cells, seed %llu, hash %s\n",
                 report.kind.c_str(), report.cells.size(),
                 (unsigned long long)report.master_seed,
                 report.config_hash.c_str());
  auto outcomes = check_assertions(report, config.assertions);
  bool failed = false;
  for (const auto& o : outcomes) {
    std::fprintf(stderr, "assert %s: %s (actual %.6f)\n",
                 o.passed ? "PASS" : "FAIL", o.description.c_str(), o.actual);
    failed = failed || !o.passed;
  }
  return failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"classification experiments over finite-alphabet sources"};
  app.require_subcommand(1);
  app.footer(
      "Symbol map used across params and config files:\n"
      "  Delta (fidelity criterion)     <-> --delta-crit / delta_crit\n"
      "  delta (transition floor)       <-> --delta-floor / delta_floor\n"
      "                                     (delta_source in experiment configs)\n"
      "  eps0 (slack)                   <-> --eps0\n"
      "  ell (codeword length)          <-> --ell\n"
      "  R (rate)                       <-> --rate\n"
      "  beta0 (separation fraction)    <-> --min-dist-frac\n"
      "Training layout: n_bar = K*(N+k0) + N; the verdict threshold is\n"
      "Delta/2, inclusive.");

  GenSourceArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-source", "write a source spec JSON");
  gen_cmd->add_option("--type", gen.type, "iid | markov | block_repeat")
      ->required()
      ->check(CLI::IsMember({"iid", "markov", "block_repeat"}));
  gen_cmd->add_option("--out", gen.out, "output spec path")->required();
  gen_cmd->add_option("--alphabet-size", gen.alphabet_size);
  gen_cmd->add_option("--probs", gen.probs, "iid: comma separated probabilities");
  gen_cmd->add_option("--row", gen.rows,
                      "markov: one comma separated transition row per context");
  gen_cmd->add_option("--order", gen.order, "markov order");
  gen_cmd->add_option("--dither", gen.dither, "noise channel rate");
  gen_cmd->add_option("--ell", gen.ell, "block_repeat: codeword length");
  gen_cmd->add_option("--rate", gen.rate, "block_repeat: rate R");
  gen_cmd->add_option("--min-dist-frac", gen.min_dist_frac,
                      "block_repeat: cross codebook separation fraction");
  gen_cmd->add_option("--members", gen.members,
                      "block_repeat: codebooks to build");
  gen_cmd->add_option("--member-index", gen.member_index,
                      "block_repeat: which codebook to emit");
  gen_cmd->add_option("--repeat", gen.repeat, "block_repeat: runs per codeword");
  gen_cmd->add_option("--seed", gen.seed, "construction and provenance seed");
  gen_cmd->add_flag("--quiet", gen.quiet);

  std::string sample_spec, sample_out;
  std::size_t sample_len = 0;
  std::uint64_t sample_seed = 1;
  bool sample_quiet = false;
  auto* sample_cmd =
      app.add_subcommand("sample", "draw a sequence from a source spec");
  sample_cmd->add_option("--spec", sample_spec)->required();
  sample_cmd->add_option("--len", sample_len, "symbols to draw")->required();
  auto* sample_seed_opt = sample_cmd->add_option("--seed", sample_seed);
  sample_cmd->add_option("--out", sample_out, "raw one byte per symbol")
      ->required();
  sample_cmd->add_flag("--quiet", sample_quiet);

  DivergenceArgs div;
  auto* div_cmd =
      app.add_subcommand("divergence", "divergence between two source specs");
  div_cmd->add_option("--kind", div.kind)->check(CLI::IsMember({"kl", "vl"}));
  div_cmd->add_option("--p", div.p_path)->required();
  div_cmd->add_option("--q", div.q_path)->required();
  div_cmd->add_option("--n", div.n, "block order (kl) or resolution (vl)");
  div_cmd->add_option("--method", div.method, "exact | mc | auto (vl only)");
  div_cmd->add_option("--samples", div.samples);
  div_cmd->add_option("--seed", div.seed);
  div_cmd->add_option("--rate", div.rate, "vl: rate in the length cap");
  div_cmd->add_option("--eps0", div.eps0, "vl: slack in the length cap");
  div_cmd->add_option("--out", div.out.path);
  div_cmd->add_option("--format", div.out.format)
      ->check(CLI::IsMember({"csv", "json"}));
  div_cmd->add_flag("--quiet", div.out.quiet);

  ClassifyArgs cls;
  auto* cls_cmd = app.add_subcommand(
      "classify", "one classification of a sequence pair or sample");
  cls_cmd->add_option("--method", cls.method, "ml | esc | vl")->required();
  cls_cmd->add_option("--x", cls.x_path)->required();
  cls_cmd->add_option("--y", cls.y_path);
  cls_cmd->add_option("--params", cls.params_path, "JSON parameter file");
  auto* f_dc = cls_cmd->add_option("--delta-crit", cls.params.delta_crit);
  auto* f_K = cls_cmd->add_option("--K", cls.params.K, "training block count");
  auto* f_N = cls_cmd->add_option("--N", cls.params.N, "training block length");
  auto* f_k0 = cls_cmd->add_option("--k0", cls.params.k0, "guard length");
  auto* f_e = cls_cmd->add_option("--eps0", cls.params.eps0);
  auto* f_df = cls_cmd->add_option("--delta-floor", cls.params.delta_source);
  auto* f_r = cls_cmd->add_option("--rate", cls.params.rate);
  cls_cmd->add_option("--alphabet-size", cls.alphabet_size);
  cls_cmd->add_option("--p", cls.p_path, "ml: spec of the law backing x");
  cls_cmd->add_option("--q", cls.q_path, "ml: spec of the alternative law");
  cls_cmd->add_option("--n", cls.ml_len, "ml: sample prefix length");
  cls_cmd->add_option("--out", cls.out.path);
  cls_cmd->add_option("--format", cls.out.format)
      ->check(CLI::IsMember({"csv", "json"}));
  cls_cmd->add_flag("--quiet", cls.out.quiet);

  std::string exp_config;
  int exp_threads = 0;
  Output exp_out;
  auto* exp_cmd = app.add_subcommand(
      "experiment", "run an experiment config and emit its report");
  exp_cmd->add_option("--config", exp_config)->required();
  exp_cmd->add_option("--threads", exp_threads,
                      "worker threads; never changes results");
  exp_cmd->add_option("--out", exp_out.path);
  exp_cmd->add_option("--format", exp_out.format)
      ->check(CLI::IsMember({"csv", "json"}));
  exp_cmd->add_flag("--quiet", exp_out.quiet);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error[cli]: %s\n", e.what());
    return 1;
  }

  try {
    if (gen_cmd->parsed()) return run_gen_source(gen);
    if (sample_cmd->parsed())
      return run_sample(sample_spec, sample_len, sample_seed,
                        sample_seed_opt->count() > 0, sample_out,
                        sample_quiet);
    if (div_cmd->parsed()) return run_divergence(div);
    if (cls_cmd->parsed()) {
      cls.has_delta_crit = f_dc->count() > 0;
      cls.has_K = f_K->count() > 0;
      cls.has_N = f_N->count() > 0;
      cls.has_k0 = f_k0->count() > 0;
      cls.has_eps0 = f_e->count() > 0;
      cls.has_delta_floor = f_df->count() > 0;
      cls.has_rate = f_r->count() > 0;
      return run_classify(cls);
    }
    if (exp_cmd->parsed())
      return run_experiment_cmd(exp_config, exp_threads, exp_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error[%s]: %s\n", e.code().c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[internal]: %s\n", e.what());
    return 1;
  }
  return 0;
}
