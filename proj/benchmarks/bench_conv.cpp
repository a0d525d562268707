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

#include <random>

#include "flowrnn/conv.hpp"

namespace {

using namespace flowrnn;

template <class T>
void fill(T& x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : x.values()) v = u(rng);
}

void BM_LiftConv(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Signal f(Grid(n, n), 1);
  Kernel u(8, 1, 3, 3);
  fill(f, 1);
  fill(u, 2);
  for (auto _ : state) benchmark::DoNotOptimize(lift_conv(f, u));
}
BENCHMARK(BM_LiftConv)->Arg(16)->Arg(32);

void BM_GroupConv(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto kind = state.range(1) ? GroupKind::roto_translation : GroupKind::translation;
  const int r = rotation_slots(kind);
  GroupSignal h(Grid(n, n), r, 8);
  Kernel w(8, 8, 3, 3, r);
  fill(h, 3);
  fill(w, 4);
  for (auto _ : state) benchmark::DoNotOptimize(group_conv(h, w));
}
BENCHMARK(BM_GroupConv)->Args({16, 0})->Args({32, 0})->Args({16, 1});

void BM_FlowConv(benchmark::State& state) {
  const auto v = std::make_shared<const FlowSet>(build_translation_flow_set(static_cast<int>(state.range(0))));
  const bool full = state.range(1) != 0;
  LiftedState h(v, GroupSignal(Grid(16, 16), 1, 8));
  for (auto& s : h.slices) fill(s, 5);
  Kernel base(8, 8, 3, 3);
  fill(base, 6);
  const VKernel w = full ? VKernel::full(base, std::vector<double>(v->size(), 0.1))
                         : VKernel::delta(base);
  for (auto _ : state) benchmark::DoNotOptimize(flow_conv(h, w));
  state.SetLabel(full ? "full profile" : "delta");
}
BENCHMARK(BM_FlowConv)->Args({1, 0})->Args({2, 0})->Args({1, 1});

}  // namespace
