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

#include "sdx/rating.hpp"
#include "sdx/rng.hpp"
#include "sdx/trueskill.hpp"

namespace sdx {
namespace {

void BM_TrueSkillUpdate(benchmark::State& state) {
  const TrueSkillParams params;
  Rating a{27.0, 3.0}, b{24.0, 4.0};
  const bool draw = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(trueskill_update(a, b, draw, params));
}
BENCHMARK(BM_TrueSkillUpdate)->Arg(0)->Arg(1);

void BM_Replay(benchmark::State& state) {
  const std::vector<std::string> models{"alpha", "bravo", "charlie", "delta"};
  std::vector<ComparisonRecord> records;
  Rng rng(1);
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    ComparisonRecord r;
    r.assessor = "p1";
    const auto x = static_cast<std::size_t>(rng.uniform_int(0, 3));
    const auto y = (x + 1 + static_cast<std::size_t>(rng.uniform_int(0, 2))) % 4;
    r.model_a = models[x];
    r.model_b = models[y];
    r.song = "s";
    r.choice = rng.coin() ? Choice::kA : Choice::kB;
    r.timestamp = "2026-01-01T00:00:00Z";
    records.push_back(r);
  }
  for (auto _ : state) benchmark::DoNotOptimize(replay(records, models).matches());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Replay)->Arg(1000)->Arg(10000);

}  // namespace
}  // namespace sdx
