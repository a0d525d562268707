// Copyright 2026 The flowrnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "flowrnn/data.hpp"
#include "flowrnn/learn.hpp"

namespace {

using namespace flowrnn;

ModelSpec spec_for(int family) {
  ModelSpec spec;
  spec.family = family == 0 ? ModelFamily::grnn : ModelFamily::fernn;
  spec.flow_set = std::make_shared<const FlowSet>(build_translation_flow_set(family));
  return spec;
}

std::vector<SpaceTimeSignal> batch() {
  FlowDatasetConfig cfg;
  cfg.train_flows = cfg.val_flows = cfg.test_flows =
      std::make_shared<const FlowSet>(build_translation_flow_set(1));
  cfg.train_count = 8;
  return frames_of(gen_flowing_sprites(cfg, Split::train));
}

// Arg: 0 = G-RNN, N > 0 = FERNN over V^T_N.
void BM_TrainStepGradient(benchmark::State& state) {
  const Model m = init_model(spec_for(static_cast<int>(state.range(0))), 1);
  const auto b = batch();
  for (auto _ : state) benchmark::DoNotOptimize(backward(m, b, 6, 6));
}
BENCHMARK(BM_TrainStepGradient)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_AutoregressiveRollout(benchmark::State& state) {
  const Model m = init_model(spec_for(static_cast<int>(state.range(0))), 1);
  const auto b = batch();
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(m, b, 6, 6, RolloutMode::autoregressive));
  }
}
BENCHMARK(BM_AutoregressiveRollout)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
