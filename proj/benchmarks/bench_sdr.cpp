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
#include "sdx/evaluator.hpp"

namespace sdx {
namespace {

void BM_SdrSource(benchmark::State& state) {
  const auto frames = static_cast<std::size_t>(state.range(0));
  const AudioBuffer target = bench::noise(frames, 1);
  const AudioBuffer estimate = target * 0.9 + bench::noise(frames, 2) * 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(sdr_source(target, estimate));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SdrSource)->Arg(kSampleRate)->Arg(10 * kSampleRate)->Arg(60 * kSampleRate);

void BM_SdrSong(benchmark::State& state) {
  Stems targets, estimates;
  for (SourceClass c : kAllClasses) {
    targets[c] = bench::noise(10 * kSampleRate, 10 + index_of(c));
    estimates[c] = targets[c] * 0.8;
  }
  for (auto _ : state) benchmark::DoNotOptimize(sdr_song(targets, estimates).mean);
}
BENCHMARK(BM_SdrSong);

}  // namespace
}  // namespace sdx
