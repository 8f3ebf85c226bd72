#include <benchmark/benchmark.h>

#include <vector>

#include "uniclass/block_repeat.hpp"
#include "uniclass/classifiers.hpp"
#include "uniclass/codebook.hpp"
#include "uniclass/divergence.hpp"
#include "uniclass/markov.hpp"
#include "uniclass/recurrence_index.hpp"
#include "uniclass/rng.hpp"

using namespace uniclass;

namespace {

std::vector<std::vector<Symbol>> random_blocks(std::size_t k, std::size_t n,
                                               std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<Symbol>> blocks(k, std::vector<Symbol>(n));
  for (auto& block : blocks)
    for (Symbol& s : block) s = Symbol(rng.below(2));
  return blocks;
}

std::vector<SymbolSpan> spans(const std::vector<std::vector<Symbol>>& blocks) {
  std::vector<SymbolSpan> out;
  for (const auto& b : blocks) out.emplace_back(b);
  return out;
}

void BM_IndexBuild(benchmark::State& state) {
  const auto blocks = random_blocks(std::size_t(state.range(0)), 1024, 1);
  const auto views = spans(blocks);
  for (auto _ : state) {
    RecurrenceIndex idx(views, Alphabet{2});
    benchmark::DoNotOptimize(idx.block_count());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1024);
}
BENCHMARK(BM_IndexBuild)->Arg(4)->Arg(64)->Arg(256);

void BM_RecurrenceQuery(benchmark::State& state) {
  const auto blocks = random_blocks(64, 1024, 2);
  RecurrenceIndex idx(spans(blocks), Alphabet{2});
  Rng rng(3);
  std::vector<Symbol> z(16);
  for (auto _ : state) {
    for (Symbol& s : z) s = Symbol(rng.below(2));
    benchmark::DoNotOptimize(idx.recurrence_time(SymbolSpan(z)));
  }
}
BENCHMARK(BM_RecurrenceQuery);

void BM_MatchLengths(benchmark::State& state) {
  const auto blocks = random_blocks(64, 1024, 4);
  RecurrenceIndex idx(spans(blocks), Alphabet{2});
  Rng rng(5);
  std::vector<Symbol> z(1024);
  for (Symbol& s : z) s = Symbol(rng.below(2));
  for (auto _ : state)
    benchmark::DoNotOptimize(idx.avg_match_length(SymbolSpan(z), 18));
}
BENCHMARK(BM_MatchLengths);

void BM_KlExact(benchmark::State& state) {
  MarkovSource p(Alphabet{2}, 1, {{0.8, 0.2}, {0.3, 0.7}});
  MarkovSource q(Alphabet{2}, 1, {{0.6, 0.4}, {0.4, 0.6}});
  const int n = int(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        kl_divergence_n(p, q, n, DivMethod::Exact).value);
}
BENCHMARK(BM_KlExact)->Arg(4)->Arg(10)->Arg(16);

void BM_VlExpectedLength(benchmark::State& state) {
  MarkovSource p(Alphabet{2}, 1, {{0.8, 0.2}, {0.3, 0.7}});
  MarkovSource q(Alphabet{2}, 1, {{0.6, 0.4}, {0.4, 0.6}});
  VLLengthParams params{4096, 0.5, 0.05};
  for (auto _ : state)
    benchmark::DoNotOptimize(
        vl_expected_length(p, q, params, LengthMethod::Exact));
}
BENCHMARK(BM_VlExpectedLength);

void BM_EscClassify(benchmark::State& state) {
  ClassifierParams params;
  params.K = 64;
  params.N = 1024;
  params.eps0 = 0.25;
  params.delta_source = 0.05;
  auto a = make_bernoulli(0.5);
  auto b = make_bernoulli(0.05);
  Sequence x = a->sample(params.n_bar(), 1);
  Sequence y = b->sample(params.n_bar(), 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        esc_classify(x.view(), y.view(), params, Alphabet{2}));
  state.SetItemsProcessed(state.iterations() * params.n_bar());
}
BENCHMARK(BM_EscClassify);

void BM_VlClassify(benchmark::State& state) {
  ClassifierParams params;
  params.K = 64;
  params.N = 1024;
  params.eps0 = 0.05;
  auto a = make_bernoulli(0.5);
  auto b = make_bernoulli(0.05);
  Sequence x = a->sample(params.n_bar(), 1);
  Sequence y = b->sample(params.n_bar(), 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        vl_classify(x.view(), y.view(), params, Alphabet{2}));
  state.SetItemsProcessed(state.iterations() * params.n_bar());
}
BENCHMARK(BM_VlClassify);

void BM_BlockRepeatSample(benchmark::State& state) {
  auto books = build_cyclic_codebooks(16, 0.5, 0.25, 1, 7);
  BlockRepeatSource src(books[0], 0.05, 1);
  std::vector<Symbol> out(65536);
  Rng rng(9);
  for (auto _ : state) {
    src.sample_into(out, rng);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * out.size());
}
BENCHMARK(BM_BlockRepeatSample);

}  // namespace

BENCHMARK_MAIN();
