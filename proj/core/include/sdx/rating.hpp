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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdx/audio.hpp"
#include "sdx/dataset.hpp"
#include "sdx/trueskill.hpp"

namespace sdx {

enum class StimulusKind { kExtraction, kResidual };
inline constexpr std::array<StimulusKind, 2> kAllStimulusKinds{StimulusKind::kExtraction, StimulusKind::kResidual};

std::string_view to_string(StimulusKind kind);
StimulusKind parse_stimulus_kind(std::string_view text);

enum class Choice { kA, kB };

std::string_view to_string(Choice choice);
Choice parse_choice(std::string_view text);

// One judgment of the listening test; the log schema.
struct ComparisonRecord {
  std::string assessor;
  std::string model_a;
  std::string model_b;
  std::string song;
  int segment = 0;
  SourceClass source = SourceClass::kVocals;
  StimulusKind stimulus = StimulusKind::kExtraction;
  Choice choice = Choice::kA;
  double elapsed_seconds = 0.0;
  int switch_count = 0;
  std::string timestamp;  // ISO 8601, UTC

  const std::string& winner() const { return choice == Choice::kA ? model_a : model_b; }
  const std::string& loser() const { return choice == Choice::kA ? model_b : model_a; }
  bool operator==(const ComparisonRecord&) const = default;
};

// Throws InvalidArgument on model_a == model_b or negative counters.
void validate(const ComparisonRecord& record);

nlohmann::json to_json(const ComparisonRecord& record);
ComparisonRecord comparison_from_json(const nlohmann::json& doc);
std::string to_jsonl(const ComparisonRecord& record);  // one line, newline-terminated
// Blank lines are skipped; throws SchemaError with the line number.
std::vector<ComparisonRecord> parse_comparison_log(std::string_view text);

// Ratings as a fold over a log: every record is one decisive match.
class RatingBook {
 public:
  explicit RatingBook(TrueSkillParams params = {}) : params_(params) {}

  void add_model(const std::string& model);
  void apply(const ComparisonRecord& record);
  const std::map<std::string, Rating>& ratings() const { return ratings_; }
  const TrueSkillParams& params() const { return params_; }
  std::size_t matches() const { return matches_; }

 private:
  TrueSkillParams params_;
  std::map<std::string, Rating> ratings_;
  std::size_t matches_ = 0;
};

RatingBook replay(std::span<const ComparisonRecord> records, std::span<const std::string> models = {},
                  const TrueSkillParams& params = {});

nlohmann::json standings_json(const RatingBook& book);

// --- schedule ----------------------------------------------------------------

struct PlannedComparison {
  std::string model_a;  // pair in model-list order; sides are assigned later
  std::string model_b;
  SourceClass source = SourceClass::kVocals;
  StimulusKind stimulus = StimulusKind::kExtraction;
  std::size_t slot = 0;  // index into the song/segment slots
};

struct SchedulePlan {
  std::vector<PlannedComparison> comparisons;
};

struct ScheduleConfig {
  int per_cell = 3;
  int classes = kNumClasses;  // first `classes` of vocals, bass, drums, other
  int stimuli = 2;            // extraction, then residual
  std::size_t slots = 1;      // song/segment slots, assigned round-robin
};

// Every (pair, class, stimulus) cell appears per_cell times, in an order
// shuffled by `seed`. Throws TooFewModels for fewer than two models.
SchedulePlan schedule_comparisons(std::span<const std::string> models, const ScheduleConfig& config,
                                  std::uint64_t seed);

// --- segments ------------------------------------------------------------------

inline constexpr double kDefaultSegmentSeconds = 7.0;

struct Segment {
  std::size_t start = 0;  // samples
  std::size_t end = 0;    // exclusive

  bool operator==(const Segment&) const = default;
};

// Greedy top-n windows by energy; ties go to the earliest start. Windows are
// at least min_gap apart and returned in time order. Throws SongTooShort.
std::vector<Segment> select_segments(const AudioBuffer& song, std::size_t n,
                                     double segment_seconds = kDefaultSegmentSeconds,
                                     double min_gap_seconds = 0.0);

// --- statistics ----------------------------------------------------------------

struct WinMatrix {
  std::vector<std::string> models;           // sorted
  std::vector<std::vector<int>> wins;        // wins[i][j]: i beat j
  std::vector<std::vector<double>> row_normalized;   // rows sum to 1 when the row has wins
  std::vector<std::vector<double>> pair_normalized;  // wins[i][j] / matches(i, j)
};

struct AssessorStats {
  std::size_t comparisons = 0;
  double elapsed_mean = 0.0;
  double elapsed_std = 0.0;  // population
  double switches_mean = 0.0;
  double switches_std = 0.0;
  // "all" plus one entry per assessor category.
  std::map<std::string, WinMatrix> matrices;
};

WinMatrix win_matrix(std::span<const ComparisonRecord> records);

// `categories` maps assessor id to category; unmapped assessors appear only
// under "all". Throws EmptyInput.
AssessorStats assessor_stats(std::span<const ComparisonRecord> records,
                             const std::map<std::string, std::string>& categories = {});

nlohmann::json to_json(const WinMatrix& matrix);
nlohmann::json to_json(const AssessorStats& stats);

}  // namespace sdx
