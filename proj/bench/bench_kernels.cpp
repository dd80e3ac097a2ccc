// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>

#include "tae/tae.hpp"

using namespace tae;

namespace {

PanelSequence random_sequence(std::mt19937& rng, std::size_t panels, std::size_t words, Role role) {
  std::uniform_int_distribution<int> w(0, 499);
  std::vector<std::string> texts(panels);
  for (auto& t : texts)
    for (std::size_t i = 0; i < words; ++i) t += "w" + std::to_string(w(rng)) + " ";
  return make_sequence(texts, role, TemplateKind::slides());
}

std::vector<DocumentPair> random_corpus(std::size_t docs, std::size_t panels) {
  std::mt19937 rng(42);
  std::vector<DocumentPair> out;
  for (std::size_t d = 0; d < docs; ++d)
    out.push_back({random_sequence(rng, panels, 40, Role::Reference), random_sequence(rng, panels, 40, Role::Generated)});
  return out;
}

MetricId metric_arg(const benchmark::State& state) { return static_cast<MetricId>(state.range(1)); }

void BM_MatrixSerial(benchmark::State& state) {
  std::mt19937 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = random_sequence(rng, n, 60, Role::Generated);
  const auto r = random_sequence(rng, n, 60, Role::Reference);
  const auto metric = make_metric(metric_arg(state));
  for (auto _ : state) benchmark::DoNotOptimize(similarity_matrix_serial(g, r, *metric));
  state.SetItemsProcessed(state.iterations() * n * n);
}

void BM_MatrixParallel(benchmark::State& state) {
  std::mt19937 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = random_sequence(rng, n, 60, Role::Generated);
  const auto r = random_sequence(rng, n, 60, Role::Reference);
  const auto metric = make_metric(metric_arg(state));
  for (auto _ : state) benchmark::DoNotOptimize(similarity_matrix(g, r, *metric));
  state.SetItemsProcessed(state.iterations() * n * n);
  state.counters["threads"] = omp_get_max_threads();
}

void BM_CorpusSerial(benchmark::State& state) {
  const auto pairs = random_corpus(static_cast<std::size_t>(state.range(0)), 8);
  const auto metric = make_metric(metric_arg(state));
  for (auto _ : state) benchmark::DoNotOptimize(corpus_score_serial(pairs, *metric));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CorpusParallel(benchmark::State& state) {
  const auto pairs = random_corpus(static_cast<std::size_t>(state.range(0)), 8);
  const auto metric = make_metric(metric_arg(state));
  for (auto _ : state) benchmark::DoNotOptimize(corpus_score(pairs, *metric));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = omp_get_max_threads();
}

// range(1) is the MetricId: 0 rouge_l, 2 meteor
void matrix_args(benchmark::internal::Benchmark* b) {
  for (int m : {0, 2})
    for (int n : {8, 32}) b->Args({n, m});
}

void corpus_args(benchmark::internal::Benchmark* b) {
  for (int m : {0, 2})
    for (int docs : {16, 128}) b->Args({docs, m});
}

}  // namespace

BENCHMARK(BM_MatrixSerial)->Apply(matrix_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MatrixParallel)->Apply(matrix_args)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_CorpusSerial)->Apply(corpus_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorpusParallel)->Apply(corpus_args)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
