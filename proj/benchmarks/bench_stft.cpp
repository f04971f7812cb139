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
#include "sdx/stft.hpp"

namespace sdx {
namespace {

void BM_Stft(benchmark::State& state) {
  const AudioBuffer x = bench::noise(10 * kSampleRate, 5);
  const auto len = static_cast<std::size_t>(state.range(0));
  const FrameSpec spec{len, len / 4, WindowKind::kHann};
  for (auto _ : state) benchmark::DoNotOptimize(stft(x, spec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.frames()));
}
BENCHMARK(BM_Stft)->Arg(512)->Arg(2048)->Arg(4096);

void BM_StftRoundTrip(benchmark::State& state) {
  const AudioBuffer x = bench::noise(10 * kSampleRate, 6);
  const auto len = static_cast<std::size_t>(state.range(0));
  const FrameSpec spec{len, len / 4, WindowKind::kHann};
  for (auto _ : state) benchmark::DoNotOptimize(istft(stft(x, spec)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.frames()));
}
BENCHMARK(BM_StftRoundTrip)->Arg(512)->Arg(4096);

}  // namespace
}  // namespace sdx
