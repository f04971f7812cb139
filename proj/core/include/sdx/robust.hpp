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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdx/dataset.hpp"
#include "sdx/manifest.hpp"
#include "sdx/separation.hpp"

namespace sdx {

// Picks the separator for one song. Trained models return the same instance
// for every song; the oracle is built per song from its clean stems.
using SeparatorForSong = std::function<SeparatorPtr(const Song& song, std::size_t index)>;

SeparatorForSong same_separator(SeparatorPtr sep);
// Oracle IRM over the clean dataset, matched to the input by song index.
SeparatorForSong oracle_for(std::span<const Song> clean, FrameSpec frames = kMaskFrames);

// --- iterative refinement ----------------------------------------------------

enum class RefineMethod { kFiltered, kRedistributed };

std::string_view to_string(RefineMethod method);
RefineMethod parse_refine_method(std::string_view text);

// s'_c = sep_c(s_c)
Stems refine_filtered(const Separator& sep, const Stems& stems);
// s'_c = sum over k of sep_c(s_k)
Stems refine_redistributed(const Separator& sep, const Stems& stems);
Stems refine_stems(const Separator& sep, const Stems& stems, RefineMethod method);

struct SongFailure {
  std::string song_id;
  std::string message;
};

struct RefineResult {
  std::vector<Song> songs;  // failed songs are dropped
  std::vector<SongFailure> failures;
};

// Refines every song; a throwing separator aborts only its song.
RefineResult refine_dataset(std::span<const Song> songs, const SeparatorForSong& sep, RefineMethod method,
                            int jobs = 1);

struct RefineOutput {
  Manifest manifest;
  std::vector<SongFailure> failures;
};

// Manifest driver: writes <out_dir>/<song>/<class>.wav and manifest.json.
RefineOutput refine_dataset(const Manifest& dataset, const SeparatorForSong& sep, RefineMethod method,
                            const std::filesystem::path& out_dir, int jobs = 1);

struct RefinementStep {
  int iteration = 0;
  std::string dataset_ref;
  nlohmann::json metrics = nlohmann::json::object();
};

// D_0 is the input dataset; D_i is the output of the i-th refinement.
struct RefinementState {
  int iteration = 0;
  std::vector<Song> dataset;
  SeparatorForSong model;
  std::vector<RefinementStep> history;
};

struct RefinementHooks {
  // Trains UMX^(i) on D_i. Called with i = 0 .. N-1.
  std::function<SeparatorForSong(std::span<const Song> dataset, int iteration)> train;
  // Optional: metrics for D_i, stored in the history.
  std::function<nlohmann::json(std::span<const Song> dataset, int iteration)> metrics;
  // Optional: persists D_i and returns a reference to it (e.g. a path).
  std::function<std::string(std::span<const Song> dataset, int iteration)> store;
};

// Alternates training and refinement N times. Each model is trained from
// scratch on the current dataset.
RefinementState iterate_refinement(std::vector<Song> dataset, int iterations, RefineMethod method,
                                   const RefinementHooks& hooks, int jobs = 1);

// --- loss truncation ---------------------------------------------------------

enum class TruncationAxis { kBatch, kTime, kBoth };

std::string_view to_string(TruncationAxis axis);
TruncationAxis parse_truncation_axis(std::string_view text);

struct TruncationPolicy {
  double quantile = 1.0;  // q in (0, 1]
  TruncationAxis axis = TruncationAxis::kBatch;
  int warmup_steps = 0;  // no truncation before this step
};

void validate(const TruncationPolicy& policy);

// Row-major [batch x time] loss values.
struct LossTable {
  std::size_t batch = 0;
  std::size_t time = 0;
  std::vector<double> values;

  double at(std::size_t b, std::size_t t) const { return values[b * time + t]; }
};

// Nearest-rank quantile: the ceil(q*n)-th smallest value.
double nearest_rank(std::span<const double> values, double q);

// 1 = keep. Entries strictly above the threshold are dropped, ties kept.
// Batch: whole samples by mean loss. Time: frames within each sample.
// Both: batch first, then time within the surviving samples.
std::vector<std::uint8_t> truncate_losses(const LossTable& losses, const TruncationPolicy& policy, int step = -1);

// --- energy-based stem cleaning ------------------------------------------------

inline constexpr double kCleanThresholdDb = 20.0;
inline constexpr double kMarginSaturationDb = 100.0;

struct CleanDecision {
  std::string song_id;
  SourceClass label = SourceClass::kVocals;
  bool clean = false;
  // Smallest energy ratio of the labelled estimate over another estimate,
  // clamped to +-100 dB. Silent stems report +100.
  double margin_db = 0.0;
  std::array<double, kNumClasses> energies{};
};

nlohmann::json to_json(const CleanDecision& decision);

// Feeds each class stem through the separator as a mixture.
CleanDecision energy_clean_stem(const Separator& sep, const AudioBuffer& stem, SourceClass label,
                                std::string song_id, double threshold_db = kCleanThresholdDb);

std::vector<CleanDecision> energy_clean(std::span<const Song> songs, const SeparatorForSong& sep,
                                        double threshold_db = kCleanThresholdDb, int jobs = 1);

}  // namespace sdx
