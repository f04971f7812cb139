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
#include "sdx/separation.hpp"

namespace sdx {
namespace {

Stems clean_stems(std::size_t frames) {
  Stems s;
  for (SourceClass c : kAllClasses) s[c] = bench::noise(frames, 20 + index_of(c));
  return s;
}

void BM_OracleIrm(benchmark::State& state) {
  const Stems clean = clean_stems(static_cast<std::size_t>(state.range(0)) * kSampleRate);
  const auto sep = oracle_irm(clean);
  const AudioBuffer x = clean.sum();
  for (auto _ : state) benchmark::DoNotOptimize(sep->separate(x));
}
BENCHMARK(BM_OracleIrm)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Overlapped(benchmark::State& state) {
  const Stems clean = clean_stems(10 * kSampleRate);
  const auto sep = oracle_irm(clean);
  const AudioBuffer x = clean.sum();
  const double overlap = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(infer_overlapped(*sep, x, 2 * kSampleRate, overlap));
}
BENCHMARK(BM_Overlapped)->Arg(0)->Arg(50)->Arg(75)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace sdx
