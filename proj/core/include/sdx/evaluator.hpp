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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdx/dataset.hpp"
#include "sdx/manifest.hpp"

namespace sdx {

enum class InfinityPolicy { kSaturate, kSkip };
enum class SilentTargetPolicy { kSkip, kError };

struct EvalPolicy {
  // How +inf (zero residual) enters dataset averages.
  InfinityPolicy infinity = InfinityPolicy::kSaturate;
  double saturation_db = 100.0;
  // What sdr_song does with an all-zero target.
  SilentTargetPolicy silent_target = SilentTargetPolicy::kSkip;
};

// Global SDR of one stereo source in dB:
//   10 log10( sum |s|^2 / sum |s - s_hat|^2 )
// over time and both channels, with no regularizing epsilon. A perfect
// estimate returns +inf. Throws LengthMismatch, SilentTarget.
double sdr_source(const AudioBuffer& target, const AudioBuffer& estimate);

struct SdrReport {
  // Empty when the source was skipped (silent target).
  std::array<std::optional<double>, kNumClasses> per_source;
  double mean = 0.0;

  std::optional<double> operator[](SourceClass c) const { return per_source[index_of(c)]; }
};

// Mean of the available per-source values; +inf if any of them is +inf.
double report_mean(const std::array<std::optional<double>, kNumClasses>& per_source);

SdrReport sdr_song(const Stems& targets, const Stems& estimates, const EvalPolicy& policy = {});

// Per-source and overall arithmetic means over songs, after applying the
// infinity policy. Throws EmptyInput.
SdrReport sdr_dataset(std::span<const SdrReport> reports, const EvalPolicy& policy = {});

// SDR of each non-overlapping segment (default one second); the trailing
// partial segment is dropped, as are segments whose target is silent.
std::vector<double> segment_sdrs(const AudioBuffer& target, const AudioBuffer& estimate,
                                 std::size_t segment_len = kSampleRate);

double median(std::vector<double> values);

// Median over songs of the median over each song's segment scores.
double sdr_sisec_median(const std::vector<std::vector<double>>& per_song_segment_scores);

enum class Phase { kPhase1, kPhase2, kFinal, kAll };

std::string_view to_string(Phase phase);
Phase parse_phase(std::string_view name);
// Number of songs scored in a phase (9, 18, 27); 0 for kAll.
std::size_t phase_size(Phase phase);

// Nested random subsets: one seeded permutation of the sorted ids, of which
// the phases take the first 9, 18 and 27 entries. Result is in input order.
// Throws TooFewSongs when fewer than 27 ids are given for a challenge phase.
std::vector<std::string> phase_subset(std::span<const std::string> song_ids, Phase phase, std::uint64_t seed);

struct LeaderboardRow {
  std::string id;
  SdrReport report;
};

// Rows kept sorted by mean SDR (descending), ties by id.
class Leaderboard {
 public:
  explicit Leaderboard(Phase phase = Phase::kAll) : phase_(phase) {}

  void insert(LeaderboardRow row);
  const std::vector<LeaderboardRow>& rows() const { return rows_; }
  Phase phase() const { return phase_; }

  // Plain-text table: Rank, Submission, Mean, Bass, Drums, Other, Vocals.
  std::string table() const;
  nlohmann::json to_json() const;

 private:
  Phase phase_;
  std::vector<LeaderboardRow> rows_;
};

// "inf" for +inf, null for a skipped source.
nlohmann::json to_json(const SdrReport& report);
SdrReport report_from_json(const nlohmann::json& doc);

struct SongScore {
  std::string song_id;
  SdrReport report;
};

struct EvaluationResult {
  std::vector<SongScore> songs;
  SdrReport overall;
  EvalPolicy policy;

  nlohmann::json to_json() const;
};

// Scores <estimates_root>/<song_id>/{bass,drums,other,vocals}.wav against the
// reference manifest. `song_ids` restricts the evaluation (e.g. to a phase);
// empty means every song. Throws MissingEstimates.
EvaluationResult evaluate_directory(const Manifest& reference, const std::filesystem::path& estimates_root,
                                    const EvalPolicy& policy = {}, int jobs = 1,
                                    std::span<const std::string> song_ids = {});

Stems load_estimates(const std::filesystem::path& song_dir);
void save_estimates(const Stems& stems, const std::filesystem::path& song_dir,
                    WavFormat format = WavFormat::kFloat32);

}  // namespace sdx
