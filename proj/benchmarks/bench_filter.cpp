// Copyright 2026 The sdxkit Authors
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

#include "bench_signal.hpp"
#include "sdx/filter.hpp"

namespace sdx {
namespace {

void BM_DesignLowpass(benchmark::State& state) {
  const FilterSpec spec = FilterSpec::lowpass(static_cast<int>(state.range(0)), 2500.0);
  for (auto _ : state) benchmark::DoNotOptimize(design_filter(spec));
}
BENCHMARK(BM_DesignLowpass)->DenseRange(kMinFilterOrder, kMaxFilterOrder, 3);

void BM_ApplyLowpass(benchmark::State& state) {
  const AudioBuffer x = bench::noise(10 * kSampleRate, 3);
  const auto coeffs = design_filter(FilterSpec::lowpass(static_cast<int>(state.range(0)), 2500.0));
  for (auto _ : state) benchmark::DoNotOptimize(apply_filter(x, coeffs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.frames()));
}
BENCHMARK(BM_ApplyLowpass)->DenseRange(kMinFilterOrder, kMaxFilterOrder, 3);

void BM_ApplyBandpass(benchmark::State& state) {
  const AudioBuffer x = bench::noise(10 * kSampleRate, 4);
  const auto coeffs = design_filter(FilterSpec::bandpass(static_cast<int>(state.range(0)), 400.0, 9000.0));
  for (auto _ : state) benchmark::DoNotOptimize(apply_filter(x, coeffs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.frames()));
}
BENCHMARK(BM_ApplyBandpass)->DenseRange(kMinFilterOrder, kMaxFilterOrder, 3);

}  // namespace
}  // namespace sdx
