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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdx/dataset.hpp"
#include "sdx/manifest.hpp"
#include "sdx/rng.hpp"

namespace sdx {

// Synthetic multitrack material for fixtures and desk-scale experiments.
// Every default instrument owns a frequency band disjoint from the others,
// so oracle masks can attribute content to its true class.

struct Band {
  double low_hz = 0.0;
  double high_hz = 0.0;
};

// Throws UnknownLabel for labels outside the default instrument set.
Band instrument_band(std::string_view label);

struct SynthConfig {
  double seconds = 1.0;
  int partials = 3;
  double level = 0.1;     // peak amplitude of each partial
  bool modulate = false;  // slow amplitude envelope, makes the signal nonstationary
};

AudioBuffer synth_instrument(std::string_view label, const SynthConfig& config, Rng& rng);

RawSong synth_raw_song(std::string id, std::span<const std::string> labels,
                       const SynthConfig& config, std::uint64_t seed);

// Songs always carry vocals, bass and drums plus one to three extra stems
// drawn from the remaining instruments (repeats allowed), so the Other class
// usually groups several raw stems.
std::vector<RawSong> synth_corpus(std::size_t songs, const SynthConfig& config, std::uint64_t seed);

// Writes <root>/<song>/<nn>_<label>.wav and returns the raw-level manifest.
Manifest write_raw_corpus(std::span<const RawSong> songs, const std::filesystem::path& root,
                          const std::string& generator);

}  // namespace sdx
