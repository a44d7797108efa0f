#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fieldtrace/auc.hpp"
#include "fieldtrace/elastic_net.hpp"
#include "fieldtrace/featstore.hpp"
#include "fieldtrace/stats.hpp"
#include "fieldtrace/synth.hpp"
#include "fieldtrace/text.hpp"

using namespace fieldtrace;
using namespace fieldtrace::text;

namespace {

SynthStore small_sparse() {
  SparseSynthConfig c;
  c.n_layers = 16;
  c.dim_per_layer = 1000;
  c.records_per_class = 200;
  c.fields = {FieldKind::Title};
  return synth_sparse(c, 1);
}

void BM_ElasticNetFit(benchmark::State& state) {
  const auto s = small_sparse();
  const auto data = sparse_dataset(s.header, s.records, FieldKind::Title);
  ElasticNetConfig cfg;
  cfg.alpha = 0.05;
  cfg.epochs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_elastic_net(data, cfg).nnz());
}
BENCHMARK(BM_ElasticNetFit)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_StoreWriteRead(benchmark::State& state) {
  const auto s = small_sparse();
  const auto path = std::filesystem::temp_directory_path() / "fieldtrace-bench.cfs1";
  for (auto _ : state) {
    write_store(path, s.header, s.records);
    benchmark::DoNotOptimize(read_store(path).size());
  }
  std::filesystem::remove(path);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.records.size()));
}
BENCHMARK(BM_StoreWriteRead)->Unit(benchmark::kMillisecond);

void BM_Auc(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> scores(n);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = i % 2;
    scores[i] = g(rng) + labels[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(auc(scores, labels));
}
BENCHMARK(BM_Auc)->Arg(1000)->Arg(100000);

void BM_Levenshtein(benchmark::State& state) {
  const std::u32string a = decode_utf8("Sparse Probing of Layered Representations in Large Language Models");
  const std::u32string b = decode_utf8("Sparse probing for layer-wise representations of large language model");
  for (auto _ : state) benchmark::DoNotOptimize(levenshtein(a, b));
}
BENCHMARK(BM_Levenshtein);

void BM_WilcoxonExact(benchmark::State& state) {
  std::vector<double> d;
  for (int i = 0; i < state.range(0); ++i) d.push_back((i % 2 ? -1.0 : 0.4) * (i + 1));
  for (auto _ : state) benchmark::DoNotOptimize(wilcoxon_one_sided(d, Direction::Less).p_value);
}
BENCHMARK(BM_WilcoxonExact)->Arg(5)->Arg(12);

}  // namespace
BENCHMARK_MAIN();
