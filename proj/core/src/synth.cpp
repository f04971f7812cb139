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

#include "sdx/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "sdx/error.hpp"
#include "sdx/wav.hpp"

namespace sdx {

Band instrument_band(std::string_view label) {
  const std::string key = Taxonomy::normalize(label);
  if (key == "bass") return {60.0, 250.0};
  if (key == "vocals") return {350.0, 900.0};
  if (key == "guitar") return {1050.0, 1550.0};
  if (key == "piano") return {1750.0, 2250.0};
  if (key == "keys") return {2450.0, 2950.0};
  if (key == "strings") return {3150.0, 3650.0};
  if (key == "winds") return {3850.0, 4350.0};
  if (key == "fx") return {4550.0, 5050.0};
  if (key == "drums") return {5500.0, 8000.0};
  if (key == "percussion") return {8500.0, 11000.0};
  fail(Errc::kUnknownLabel, "no synthetic band for label '" + std::string(label) + "'");
}

AudioBuffer synth_instrument(std::string_view label, const SynthConfig& config, Rng& rng) {
  const Band band = instrument_band(label);
  const auto frames = static_cast<std::size_t>(std::llround(config.seconds * kSampleRate));
  AudioBuffer out(frames);
  // Keep partials off the band edges so neighbouring bands stay separable.
  const double margin = 0.1 * (band.high_hz - band.low_hz);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int p = 0; p < config.partials; ++p) {
    const double hz = rng.uniform(band.low_hz + margin, band.high_hz - margin);
    const double amp = config.level * rng.uniform(0.5, 1.0);
    const double pan = rng.uniform(0.6, 1.0);
    const double phase = rng.uniform(0.0, two_pi);
    const double mod_hz = rng.uniform(0.5, 2.0);
    const double mod_phase = rng.uniform(0.0, two_pi);
    const bool left_heavy = rng.coin();
    const double gl = left_heavy ? 1.0 : pan;
    const double gr = left_heavy ? pan : 1.0;
    for (std::size_t i = 0; i < frames; ++i) {
      const double t = static_cast<double>(i) / kSampleRate;
      double env = 1.0;
      if (config.modulate) env = 0.55 + 0.45 * std::sin(two_pi * mod_hz * t + mod_phase);
      const double v = amp * env * std::sin(two_pi * hz * t + phase);
      out.at(0, i) += gl * v;
      out.at(1, i) += gr * v;
    }
  }
  return out;
}

RawSong synth_raw_song(std::string id, std::span<const std::string> labels,
                       const SynthConfig& config, std::uint64_t seed) {
  RawSong song;
  song.id = std::move(id);
  Rng rng(seed);
  for (const auto& label : labels) song.stems.push_back({label, synth_instrument(label, config, rng)});
  return song;
}

std::vector<RawSong> synth_corpus(std::size_t songs, const SynthConfig& config, std::uint64_t seed) {
  static const std::vector<std::string> kExtras = {"guitar", "piano", "keys", "strings",
                                                   "winds", "fx", "percussion"};
  std::vector<RawSong> out;
  out.reserve(songs);
  for (std::size_t s = 0; s < songs; ++s) {
    Rng rng(derive_seed(seed, s));
    std::vector<std::string> labels = {"vocals", "bass", "drums"};
    const auto extras = rng.uniform_int(1, 3);
    for (std::int64_t e = 0; e < extras; ++e) {
      labels.push_back(kExtras[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(kExtras.size()) - 1))]);
    }
    char id[32];
    std::snprintf(id, sizeof(id), "song%03zu", s);
    out.push_back(synth_raw_song(id, labels, config, rng.next()));
  }
  return out;
}

Manifest write_raw_corpus(std::span<const RawSong> songs, const std::filesystem::path& root,
                          const std::string& generator) {
  Manifest m;
  m.root = root;
  m.provenance.generator = generator;
  for (const auto& song : songs) {
    ManifestSong entry;
    entry.id = song.id;
    for (std::size_t i = 0; i < song.stems.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "%02zu_%s.wav", i, song.stems[i].label.c_str());
      const std::filesystem::path rel = std::filesystem::path(song.id) / name;
      save_wav(song.stems[i].audio, root / rel);
      entry.stems.push_back({song.stems[i].label, rel});
    }
    if (song.mixture) {
      const std::filesystem::path rel = std::filesystem::path(song.id) / "mixture.wav";
      save_wav(*song.mixture, root / rel);
      entry.mixture = rel;
    }
    m.songs.push_back(std::move(entry));
  }
  return m;
}

}  // namespace sdx
