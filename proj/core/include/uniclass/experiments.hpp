#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uniclass/classifiers.hpp"
#include "uniclass/source_model.hpp"
#include "uniclass/training_layout.hpp"

namespace uniclass {

// Const0/Const1 always answer 0/1; they calibrate the harness ends.
enum class ClassifierKind { ML, ESC, VL, Const0, Const1 };
enum class PairKind { Same, Different };

std::string to_string(ClassifierKind kind);
std::string to_string(PairKind kind);
ClassifierKind parse_classifier_kind(const std::string& name);
PairKind parse_pair_kind(const std::string& name);

// Family of block-repeat sources over Hamming-separated cyclic codebooks;
// same construction parameters for every member, one codebook each.
struct FamilySpec {
  int ell = 16;
  double rate = 0.5;
  double min_dist_frac = 0.1875;
  double dither = 0.05;
  int members = 6;
  int repeat = 1;
  std::uint64_t build_seed = 1;

  // threshold length 2^(rate * ell)
  std::size_t n0_threshold() const;
};

std::vector<SourcePtr> build_family(const FamilySpec& spec);

// Picks report cells by exact match on every field that is set.
struct CellSelector {
  std::optional<std::size_t> n_bar;
  std::optional<std::size_t> K;
  std::optional<std::size_t> N;
  std::optional<std::size_t> k0;
  std::optional<ClassifierKind> classifier;
  std::optional<PairKind> pair_kind;

  std::string describe() const;
};

// metric "lambda_hat" reads the cell matched by `where`; "lambda_diff"
// reads where minus `minus`. op is "ge" or "le".
struct Assertion {
  std::string metric = "lambda_hat";
  CellSelector where;
  CellSelector minus;
  std::string op = "ge";
  double value = 0.0;
};

struct ExperimentConfig {
  std::string kind = "error_grid";  // error_grid | threshold_sweep | esc_vs_vl
  // Source-spec JSON texts for explicit pairs; ignored when family is set.
  std::vector<std::pair<std::string, std::string>> pair_specs;
  std::optional<FamilySpec> family;
  std::vector<TrainingLayout> grid;
  std::vector<ClassifierKind> classifiers;
  std::vector<PairKind> pair_kinds{PairKind::Same, PairKind::Different};
  long trials = 200;
  std::uint64_t master_seed = 1;
  double delta_crit = 0.5;
  double eps0 = 0.25;
  double delta_source = 0.05;
  double rate = 0.5;
  int ml_n = 64;    // sample length given to the known-source classifier
  int truth_n = 16;  // block order for pair truth labels
  int threads = 0;   // 0 = hardware concurrency; never affects results
  std::string gray_zone = "exclude";  // exclude | forbid
  std::vector<Assertion> assertions;
  // Original config text; the report's config hash covers its canonical form.
  std::string config_text;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);

struct CellResult {
  TrainingLayout layout;
  ClassifierKind classifier = ClassifierKind::ML;
  PairKind pair_kind = PairKind::Same;
  double lambda_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  long trials = 0;  // effective trials, after gray-zone exclusions
  long gray_excluded = 0;
  std::uint64_t seed = 0;  // master seed, repeated per row
  std::size_t n0_threshold = 0;
  // Largest per-pair error rate inside the cell's pair rotation. An
  // empirical max over the sampled pairs, nothing stronger; JSON only.
  double empirical_max = 0.0;
};

struct ExperimentReport {
  std::string kind;
  std::uint64_t master_seed = 0;
  std::string config_hash;
  std::size_t n0_threshold = 0;
  long gray_redrawn = 0;  // family pairs re-drawn for sub-threshold divergence
  std::vector<CellResult> cells;
};

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// 95% score interval; always contains errors/trials. trials == 0 -> [0, 1].
WilsonInterval wilson_interval(long errors, long trials);

// Divergence-based label at block order truth_n: exact enumeration when
// A^truth_n fits the budget, Monte Carlo with the given seed otherwise.
TruthLabel pair_truth_label(const SourcePtr& x, const SourcePtr& y,
                            int truth_n, double delta_crit,
                            std::uint64_t seed,
                            double* divergence_out = nullptr);

// Single-cell estimate with derived per-trial seeds. Throws GrayZonePair
// when the pair's divergence lies strictly between 0 and delta_crit.
CellResult estimate_error(const SourcePtr& x, const SourcePtr& y,
                          ClassifierKind classifier,
                          const ClassifierParams& params, long trials,
                          std::uint64_t seed, int ml_n = 64, int truth_n = 16);

ExperimentReport run_experiment(const ExperimentConfig& config);
// run_experiment plus kind-specific preconditions: a family whose N-bar grid
// straddles the threshold length, and (for esc_vs_vl) both ESC and VL cells.
ExperimentReport threshold_sweep(const ExperimentConfig& config);
ExperimentReport esc_vs_vl(const ExperimentConfig& config);

std::string report_to_csv(const ExperimentReport& report);
std::string report_to_json(const ExperimentReport& report);
ExperimentReport parse_report_json(const std::string& json_text);

// format "csv" or "json"; atomic write.
void emit_report(const ExperimentReport& report, const std::string& format,
                 const std::string& path);

struct AssertionOutcome {
  std::string description;
  double actual = 0.0;
  bool passed = false;
};

std::vector<AssertionOutcome> check_assertions(
    const ExperimentReport& report, const std::vector<Assertion>& assertions);

}  // namespace uniclass
