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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "sdx/listen.hpp"

namespace sdx::test {

inline const std::vector<std::string> kListenModels{"alpha", "bravo", "charlie"};

// Songs of disjoint sines with per-song gains.
inline std::vector<Song> listen_songs(std::size_t count, double seconds) {
  std::vector<Song> songs;
  const auto n = static_cast<std::size_t>(seconds * kSampleRate);
  for (std::size_t i = 0; i < count; ++i) {
    Stems stems = disjoint_stems(n, 0.2 + 0.02 * static_cast<double>(i));
    songs.push_back({"song" + std::to_string(i), stems, std::nullopt});
  }
  return songs;
}

// Model k returns every reference stem scaled by 0.5 + 0.2 k.
inline std::vector<ModelEstimates> listen_models(std::size_t count) {
  std::vector<ModelEstimates> out;
  for (std::size_t k = 0; k < count; ++k) {
    const double gain = 0.5 + 0.2 * static_cast<double>(k);
    out.push_back({kListenModels.at(k), [gain](const Song& song) {
                     Stems est = song.stems;
                     for (SourceClass c : kAllClasses) est[c] = est[c] * gain;
                     return est;
                   }});
  }
  return out;
}

inline StimulusStore listen_store(const std::filesystem::path& dir, std::size_t models = 3, std::size_t songs = 2,
                                  std::size_t segments = 2, double segment_seconds = 0.25) {
  StimulusConfig cfg;
  cfg.segments_per_song = segments;
  cfg.segment_seconds = segment_seconds;
  cfg.seed = 9;
  const auto m = listen_models(models);
  const auto s = listen_songs(songs, static_cast<double>(segments) * segment_seconds + 0.5);
  return prepare_stimuli(m, s, cfg, dir);
}

inline ServiceConfig listen_config(const std::filesystem::path& state, int per_cell = 3, std::uint64_t seed = 1) {
  ServiceConfig cfg;
  cfg.state_dir = state;
  cfg.seed = seed;
  cfg.per_cell = per_cell;
  cfg.clock = [] { return std::string("2026-01-01T00:00:00Z"); };
  return cfg;
}

}  // namespace sdx::test
