#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "irmkit/ranking.hpp"
#include "irmkit/rng.hpp"

namespace {

std::vector<std::string> shuffled_genes(std::size_t n, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("G" + std::to_string(i));
  irmkit::Rng rng(seed);
  rng.shuffle(std::span<std::string>(ids));
  return ids;
}

void BM_RboExt(benchmark::State& state) {
  const auto a = shuffled_genes(static_cast<std::size_t>(state.range(0)), 1);
  const auto b = shuffled_genes(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(irmkit::rbo_ext(a, b, 0.9));
}
BENCHMARK(BM_RboExt)->Arg(100)->Arg(1000);

void BM_KendallTau(benchmark::State& state) {
  const auto a = shuffled_genes(static_cast<std::size_t>(state.range(0)), 1);
  const auto b = shuffled_genes(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(irmkit::kendall_tau(a, b));
}
BENCHMARK(BM_KendallTau)->Arg(100)->Arg(1000);

void BM_TopK(benchmark::State& state) {
  const auto a = shuffled_genes(1000, 1);
  const auto b = shuffled_genes(1000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(irmkit::top_k_overlap(a, b, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_TopK)->Arg(10)->Arg(50);

}  // namespace
