#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "uniclass/errors.hpp"
#include "uniclass/experiments.hpp"
#include "uniclass/markov.hpp"

using namespace uniclass;

namespace {

std::string iid_spec(double p0, double p1) {
  return std::string(R"({"type":"iid","alphabet_size":2,"transitions":[[)") +
         std::to_string(p0) + "," + std::to_string(p1) + "]]}";
}

const char* kSmokeConfig = R"({
  "kind": "error_grid",
  "pairs": [
    {"x": {"type": "iid", "alphabet_size": 2, "transitions": [[0.5, 0.5]]},
     "y": {"type": "iid", "alphabet_size": 2, "transitions": [[0.95, 0.05]]}}
  ],
  "grid": [{"K": 4, "N": 64, "k0": 0}],
  "classifiers": ["const0", "const1"],
  "pair_kinds": ["different"],
  "trials": 20,
  "seed": 3,
  "delta_crit": 0.5,
  "truth_n": 4,
  "threads": 2,
  "assertions": [
    {"metric": "lambda_hat", "where": {"classifier": "const0"}, "op": "ge", "value": 1.0},
    {"metric": "lambda_hat", "where": {"classifier": "const1"}, "op": "le", "value": 0.0}
  ]
})";

}  // namespace

TEST_CASE("wilson interval brackets the point estimate") {
  auto zero = wilson_interval(0, 20);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi == doctest::Approx(0.16112515805281938).epsilon(1e-12));
  auto full = wilson_interval(20, 20);
  CHECK(full.lo == doctest::Approx(0.83887484194718065).epsilon(1e-12));
  CHECK(full.hi == 1.0);
  auto empty = wilson_interval(0, 0);
  CHECK(empty.lo == 0.0);
  CHECK(empty.hi == 1.0);

  for (long t : {1L, 7L, 100L}) {
    double prev_lo = -1.0;
    for (long e = 0; e <= t; ++e) {
      auto w = wilson_interval(e, t);
      const double rate = double(e) / double(t);
      CHECK(w.lo >= 0.0);
      CHECK(w.hi <= 1.0);
      CHECK(w.lo <= rate);
      CHECK(w.hi >= rate);
      CHECK(w.lo >= prev_lo);  // monotone in the error count
      prev_lo = w.lo;
    }
  }
}

TEST_CASE("truth labels follow the divergence against the criterion") {
  auto half = make_bernoulli(0.5);
  auto low = make_bernoulli(0.05);
  auto near = make_bernoulli(0.45);

  CHECK(pair_truth_label(half, half, 4, 0.5, 1) == TruthLabel::SameMarginal);

  double d = 0.0;
  CHECK(pair_truth_label(half, low, 4, 0.5, 1, &d) ==
        TruthLabel::DivergentAtLeastDelta);
  CHECK(d == doctest::Approx(1.197964338165570).epsilon(1e-9));

  CHECK(pair_truth_label(half, near, 4, 0.5, 1) == TruthLabel::GrayZone);

  // A zero reference probability makes the divergence infinite.
  auto constant = make_iid(Alphabet{2}, {1.0, 0.0});
  CHECK(pair_truth_label(half, constant, 4, 0.5, 1) ==
        TruthLabel::DivergentAtLeastDelta);
}

TEST_CASE("const stubs calibrate both ends of the harness") {
  auto p = make_bernoulli(0.5);
  auto q = make_bernoulli(0.05);
  ClassifierParams params;
  params.K = 2;
  params.N = 16;

  auto same0 = estimate_error(p, p, ClassifierKind::Const0, params, 50, 1);
  CHECK(same0.lambda_hat == 0.0);
  auto same1 = estimate_error(p, p, ClassifierKind::Const1, params, 50, 1);
  CHECK(same1.lambda_hat == 1.0);
  auto diff0 = estimate_error(p, q, ClassifierKind::Const0, params, 50, 1,
                              64, 1);
  CHECK(diff0.lambda_hat == 1.0);
  CHECK(diff0.trials == 50);
}

TEST_CASE("known source classifier clears a high snr pair") {
  auto p = make_bernoulli(0.5);
  auto q = make_bernoulli(0.05);
  ClassifierParams params;
  params.K = 1;
  params.N = 64;
  params.delta_crit = 0.5;
  auto cell = estimate_error(p, q, ClassifierKind::ML, params, 1000, 11, 64,
                             1);
  CHECK(cell.lambda_hat == 0.0);
  CHECK(cell.ci_hi <= 0.01);
}

TEST_CASE("a gray pair is refused by single cell estimation") {
  auto p = make_bernoulli(0.5);
  auto q = make_bernoulli(0.45);
  ClassifierParams params;
  params.N = 32;
  CHECK_THROWS_AS(
      estimate_error(p, q, ClassifierKind::Const0, params, 10, 1, 64, 4),
      GrayZonePair);
}

TEST_CASE("gray pairs stay in rotation but leave the tally") {
  ExperimentConfig config;
  config.pair_specs = {{iid_spec(0.5, 0.5), iid_spec(0.95, 0.05)},
                       {iid_spec(0.5, 0.5), iid_spec(0.55, 0.45)}};
  config.grid = {TrainingLayout{2, 16, 0}};
  config.classifiers = {ClassifierKind::Const0};
  config.pair_kinds = {PairKind::Different};
  config.trials = 20;
  config.master_seed = 5;
  config.delta_crit = 0.5;
  config.truth_n = 4;
  config.threads = 2;

  auto report = run_experiment(config);
  REQUIRE(report.cells.size() == 1);
  const auto& cell = report.cells[0];
  CHECK(cell.trials == 10);
  CHECK(cell.gray_excluded == 10);
  CHECK(cell.lambda_hat == 1.0);
  CHECK(cell.empirical_max == 1.0);
}

TEST_CASE("report json round trips every cell field") {
  ExperimentConfig config;
  config.pair_specs = {{iid_spec(0.8, 0.2), iid_spec(0.2, 0.8)},
                       {iid_spec(0.8, 0.2), iid_spec(0.8, 0.2)}};
  config.grid = {TrainingLayout{2, 32, 1}};
  config.classifiers = {ClassifierKind::ESC, ClassifierKind::VL,
                        ClassifierKind::ML};
  config.trials = 30;
  config.master_seed = 17;
  config.truth_n = 4;
  config.ml_n = 16;
  config.threads = 2;

  auto report = run_experiment(config);
  REQUIRE(report.cells.size() == 6);
  auto restored = parse_report_json(report_to_json(report));
  CHECK(restored.kind == report.kind);
  CHECK(restored.master_seed == report.master_seed);
  CHECK(restored.config_hash == report.config_hash);
  CHECK(restored.n0_threshold == report.n0_threshold);
  CHECK(restored.gray_redrawn == report.gray_redrawn);
  REQUIRE(restored.cells.size() == report.cells.size());
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    const auto& a = report.cells[i];
    const auto& b = restored.cells[i];
    CHECK(a.layout.K == b.layout.K);
    CHECK(a.layout.N == b.layout.N);
    CHECK(a.layout.k0 == b.layout.k0);
    CHECK(a.classifier == b.classifier);
    CHECK(a.pair_kind == b.pair_kind);
    CHECK(a.lambda_hat == b.lambda_hat);
    CHECK(a.ci_lo == b.ci_lo);
    CHECK(a.ci_hi == b.ci_hi);
    CHECK(a.trials == b.trials);
    CHECK(a.gray_excluded == b.gray_excluded);
    CHECK(a.seed == b.seed);
    CHECK(a.n0_threshold == b.n0_threshold);
    CHECK(a.empirical_max == b.empirical_max);
  }
}

TEST_CASE("config hash tracks content and ignores formatting") {
  auto a = parse_experiment_config(kSmokeConfig);
  std::string spaced(kSmokeConfig);
  spaced.insert(1, "\n   ");
  auto b = parse_experiment_config(spaced);
  std::string changed(kSmokeConfig);
  const auto at = changed.find("\"trials\": 20");
  REQUIRE(at != std::string::npos);
  changed.replace(at, 12, "\"trials\": 21");
  auto c = parse_experiment_config(changed);

  auto ra = run_experiment(a);
  auto rb = run_experiment(b);
  auto rc = run_experiment(c);
  CHECK(ra.config_hash == rb.config_hash);
  CHECK(ra.config_hash != rc.config_hash);
}

TEST_CASE("csv output matches the frozen golden") {
  auto config = parse_experiment_config(kSmokeConfig);
  auto report = run_experiment(config);
  const std::string expected =
      "n_bar,K,N,k0,classifier,pair_kind,lambda_hat,ci_lo,ci_hi,trials,"
      "gray_excluded,seed,n0_threshold\n"
      "320,4,64,0,const0,different,1,0.83887484194718065,1,20,0,3,0\n"
      "320,4,64,0,const1,different,0,0,0.16112515805281938,20,0,3,0\n";
  CHECK(report_to_csv(report) == expected);

  auto outcomes = check_assertions(report, config.assertions);
  REQUIRE(outcomes.size() == 2);
  CHECK(outcomes[0].passed);
  CHECK(outcomes[1].passed);
}

TEST_CASE("an empty grid produces a header only csv") {
  ExperimentConfig config;
  config.pair_specs = {{iid_spec(0.5, 0.5), iid_spec(0.95, 0.05)}};
  config.classifiers = {ClassifierKind::Const0};
  config.trials = 5;
  auto report = run_experiment(config);
  CHECK(report.cells.empty());
  const std::string csv = report_to_csv(report);
  CHECK(csv.find('\n') == csv.size() - 1);
}

TEST_CASE("results are identical across thread counts") {
  std::vector<std::string> dumps;
  for (int threads : {1, 4, 8}) {
    ExperimentConfig config;
    config.pair_specs = {{iid_spec(0.8, 0.2), iid_spec(0.2, 0.8)},
                         {iid_spec(0.8, 0.2), iid_spec(0.8, 0.2)}};
    config.grid = {TrainingLayout{2, 64, 1}, TrainingLayout{1, 128, 0}};
    config.classifiers = {ClassifierKind::ESC, ClassifierKind::VL};
    config.pair_kinds = {PairKind::Same, PairKind::Different};
    config.trials = 50;
    config.master_seed = 12;
    config.truth_n = 4;
    config.threads = threads;
    dumps.push_back(report_to_json(run_experiment(config)));
  }
  CHECK(dumps[0] == dumps[1]);
  CHECK(dumps[0] == dumps[2]);
}

TEST_CASE("assertion selection and comparison") {
  ExperimentReport report;
  CellResult a;
  a.layout = TrainingLayout{2, 16, 0};
  a.classifier = ClassifierKind::ESC;
  a.pair_kind = PairKind::Different;
  a.lambda_hat = 0.4;
  CellResult b = a;
  b.classifier = ClassifierKind::VL;
  b.lambda_hat = 0.1;
  report.cells = {a, b};

  Assertion ge;
  ge.metric = "lambda_hat";
  ge.where.classifier = ClassifierKind::ESC;
  ge.op = "ge";
  ge.value = 0.3;

  Assertion diff;
  diff.metric = "lambda_diff";
  diff.where.classifier = ClassifierKind::ESC;
  diff.minus.classifier = ClassifierKind::VL;
  diff.op = "le";
  diff.value = 0.25;

  Assertion ambiguous;
  ambiguous.metric = "lambda_hat";
  ambiguous.where.pair_kind = PairKind::Different;
  ambiguous.op = "ge";
  ambiguous.value = 0.0;

  auto outcomes = check_assertions(report, {ge, diff, ambiguous});
  REQUIRE(outcomes.size() == 3);
  CHECK(outcomes[0].passed);
  CHECK(outcomes[0].actual == doctest::Approx(0.4));
  CHECK_FALSE(outcomes[1].passed);  // 0.3 > 0.25
  CHECK(outcomes[1].actual == doctest::Approx(0.3));
  CHECK_FALSE(outcomes[2].passed);
  CHECK(std::isnan(outcomes[2].actual));
  CHECK(outcomes[2].description.find("matched 2") != std::string::npos);
}

TEST_CASE("family runs label members divergent and stamp the threshold") {
  FamilySpec spec;
  spec.ell = 16;
  spec.rate = 0.5;
  spec.min_dist_frac = 0.25;
  spec.dither = 0.05;
  spec.members = 3;
  spec.repeat = 1;
  spec.build_seed = 7;
  CHECK(spec.n0_threshold() == 256);
  CHECK(build_family(spec).size() == 3);

  ExperimentConfig config;
  config.family = spec;
  config.grid = {TrainingLayout{7, 8, 0}};
  config.classifiers = {ClassifierKind::Const0};
  config.pair_kinds = {PairKind::Different};
  config.trials = 6;
  config.master_seed = 1;
  config.delta_crit = 0.2;
  config.delta_source = 0.05;
  config.eps0 = 0.05;
  config.truth_n = 16;
  config.threads = 2;

  auto report = run_experiment(config);
  REQUIRE(report.cells.size() == 1);
  CHECK(report.n0_threshold == 256);
  CHECK(report.cells[0].n0_threshold == 256);
  CHECK(report.gray_redrawn == 0);
  CHECK(report.cells[0].trials == 6);
  CHECK(report.cells[0].lambda_hat == 1.0);
}

TEST_CASE("threshold sweep demands a straddling grid") {
  FamilySpec spec;
  spec.members = 2;
  spec.build_seed = 2;

  ExperimentConfig config;
  config.kind = "threshold_sweep";
  config.family = spec;
  config.classifiers = {ClassifierKind::VL};
  config.pair_kinds = {PairKind::Different};
  config.trials = 2;
  config.delta_crit = 0.2;
  config.truth_n = 4;

  config.grid = {TrainingLayout{1, 512, 0}};  // entirely above 256
  CHECK_THROWS_AS(threshold_sweep(config), InvalidSpec);
  config.grid = {TrainingLayout{7, 8, 0}};  // entirely below
  CHECK_THROWS_AS(threshold_sweep(config), InvalidSpec);
}

TEST_CASE("the classifier duel requires both contestants") {
  ExperimentConfig config;
  config.kind = "esc_vs_vl";
  config.pair_specs = {{iid_spec(0.5, 0.5), iid_spec(0.95, 0.05)}};
  config.grid = {TrainingLayout{2, 16, 0}};
  config.classifiers = {ClassifierKind::VL};
  config.trials = 2;
  config.truth_n = 4;
  CHECK_THROWS_AS(esc_vs_vl(config), InvalidSpec);
}

TEST_CASE("universal rules trail the informed rule at worst by noise") {
  // Ber(0.5) against Ber(0.14) sits just above the criterion, so even the
  // known-source rule errs at ml_n = 16. The empirical rules may err more,
  // never significantly less.
  ExperimentConfig config;
  config.pair_specs = {{iid_spec(0.5, 0.5), iid_spec(0.86, 0.14)}};
  config.grid = {TrainingLayout{4, 64, 0}};
  config.classifiers = {ClassifierKind::ML, ClassifierKind::ESC,
                        ClassifierKind::VL};
  config.pair_kinds = {PairKind::Different};
  config.trials = 100;
  config.master_seed = 31;
  config.delta_crit = 0.5;
  config.truth_n = 1;
  config.ml_n = 16;
  config.threads = 4;

  auto report = run_experiment(config);
  REQUIRE(report.cells.size() == 3);
  const CellResult* ml = nullptr;
  for (const auto& cell : report.cells)
    if (cell.classifier == ClassifierKind::ML) ml = &cell;
  REQUIRE(ml != nullptr);
  CHECK(ml->lambda_hat > 0.0);
  for (const auto& cell : report.cells) {
    if (cell.classifier == ClassifierKind::ML) continue;
    const double slack = 2.0 * (cell.ci_hi - cell.ci_lo) +
                         2.0 * (ml->ci_hi - ml->ci_lo);
    CHECK(cell.lambda_hat >= ml->lambda_hat - slack);
  }
}
