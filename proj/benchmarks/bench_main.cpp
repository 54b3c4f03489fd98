// Microbenchmarks for the hot paths: mining, instance explanation, and the
// perturbation fit. Data comes from the synthetic generator so runs are
// reproducible; classifier labels come from the built-in reference model.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "cie/baseline.hpp"
#include "cie/blackbox.hpp"
#include "cie/evaluation.hpp"
#include "cie/explainer.hpp"
#include "cie/miner.hpp"

namespace {

struct PipelineData {
  std::vector<cie::ConceptInstance> instances;
  cie::PredictionMap predictions;
  cie::ReferenceNB model;
};

PipelineData make_data(int instances, int concepts_per_instance) {
  cie::SynthSpec spec;
  spec.instances = instances;
  spec.concepts_per_instance = concepts_per_instance;
  PipelineData data;
  data.instances = cie::gen_synth(spec);
  data.model = cie::train_reference(data.instances);
  for (const cie::ConceptInstance& inst : data.instances) {
    data.predictions[inst.id] = data.model.predict(inst);
  }
  return data;
}

void BM_Mine(benchmark::State& state) {
  const auto data = make_data(static_cast<int>(state.range(0)), 5);
  cie::MinerConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cie::mine(data.instances, data.predictions, config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Mine)->Arg(250)->Arg(500)->Arg(1000);

void BM_MineThreads(benchmark::State& state) {
  const auto data = make_data(1000, 8);
  cie::MinerConfig config;
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cie::mine(data.instances, data.predictions, config, threads));
  }
}
BENCHMARK(BM_MineThreads)->Arg(1)->Arg(2)->Arg(4);

void BM_Explain(benchmark::State& state) {
  const auto data = make_data(500, 5);
  const cie::ItemsetStore store = cie::mine(data.instances, data.predictions, cie::MinerConfig{});
  std::size_t cursor = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cie::explain(data.instances[cursor], store));
    cursor = (cursor + 1) % data.instances.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Explain);

void BM_PerturbFit(benchmark::State& state) {
  const auto data = make_data(200, 5);
  cie::PerturbParams params;
  params.num_samples = static_cast<int>(state.range(0));
  const std::string target = data.model.label_set().front();
  std::size_t cursor = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cie::perturb_fit(data.instances[cursor], data.model, target, params));
    cursor = (cursor + 1) % data.instances.size();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PerturbFit)->Arg(100)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
