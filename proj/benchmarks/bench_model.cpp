#include <benchmark/benchmark.h>

#include "irmkit/model.hpp"
#include "irmkit/rng.hpp"
#include "irmkit/scm.hpp"

namespace {

irmkit::MultiEnvDataset expression_like(std::int64_t n_per_env, std::int64_t genes) {
  irmkit::MultiEnvDataset data;
  irmkit::Rng rng(1);
  for (int e = 0; e < 5; ++e) {
    irmkit::Environment env;
    env.id = "e" + std::to_string(e);
    env.features.resize(n_per_env, genes);
    env.labels.resize(n_per_env);
    for (Eigen::Index i = 0; i < n_per_env; ++i) {
      env.labels[i] = static_cast<double>(i % 2);
      for (Eigen::Index j = 0; j < genes; ++j) env.features(i, j) = rng.normal();
    }
    data.environments.push_back(std::move(env));
  }
  for (std::int64_t j = 0; j < genes; ++j) data.gene_ids.push_back("g" + std::to_string(j));
  return data;
}

void BM_ObjectiveGradient(benchmark::State& state) {
  const auto data = expression_like(state.range(0), state.range(1));
  auto model = irmkit::LinearModel::zeros(data.n_features());
  model.theta.setConstant(0.01);
  for (auto _ : state) {
    auto ev = irmkit::evaluate(model, data, 1e4, irmkit::LossKind::Logistic);
    benchmark::DoNotOptimize(ev.gradient.theta.data());
  }
  state.SetItemsProcessed(state.iterations() * 5 * state.range(0) * state.range(1));
}
BENCHMARK(BM_ObjectiveGradient)->Args({25, 1000})->Args({200, 1000})->Args({5000, 2});

void BM_TrainScmClassification(benchmark::State& state) {
  irmkit::ScmSpec spec;
  spec.task = irmkit::ScmTask::Classification;
  spec.n_samples_per_env = static_cast<std::size_t>(state.range(0));
  const auto data = irmkit::generate_scm_dataset(spec, 0);
  irmkit::TrainConfig config;
  config.learning_rate = 0.5;
  config.total_iters = 500;
  config.anneal_iters = 50;
  for (auto _ : state) {
    auto trained = irmkit::train(data, config);
    benchmark::DoNotOptimize(trained.model.theta.data());
  }
}
BENCHMARK(BM_TrainScmClassification)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace
