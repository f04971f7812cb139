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
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdx/dataset.hpp"
#include "sdx/rating.hpp"
#include "sdx/separation.hpp"

namespace sdx {

// --- stimuli -------------------------------------------------------------------

// One segment of one song; every model is rendered on the same slots.
struct SegmentSlot {
  std::size_t index = 0;
  std::string song;
  int segment = 0;  // index within the song
  Segment bounds;
  std::string reference_id;
  std::filesystem::path reference_path;  // relative to the store root
};

struct Stimulus {
  std::string id;  // opaque; does not encode the model
  std::size_t slot = 0;
  SourceClass source = SourceClass::kVocals;
  StimulusKind kind = StimulusKind::kExtraction;
  std::string model;
  std::filesystem::path path;  // relative to the store root
};

class StimulusStore {
 public:
  std::filesystem::path root;
  std::vector<std::string> models;
  std::vector<SegmentSlot> slots;
  std::vector<Stimulus> stimuli;

  // Builds the lookup tables; call after filling the vectors.
  void index();
  const Stimulus& find(const std::string& model, std::size_t slot, SourceClass source, StimulusKind kind) const;
  // Stimulus or reference clip by id. Throws InvalidArgument if unknown.
  std::filesystem::path clip_path(const std::string& id) const;
  std::size_t clip_frames(const std::string& id) const;
  bool has_clip(const std::string& id) const { return clips_.count(id) > 0; }

  nlohmann::json to_json() const;
  static StimulusStore from_json(const nlohmann::json& doc, const std::filesystem::path& root);
  // Reads <root>/stimuli.json.
  static StimulusStore load(const std::filesystem::path& root);

 private:
  std::map<std::string, std::pair<std::filesystem::path, std::size_t>> clips_;  // id -> (path, frames)
  std::map<std::string, std::size_t> by_key_;
};

// Estimates of one model for every song.
struct ModelEstimates {
  std::string name;
  std::function<Stems(const Song& song)> estimate;
};

ModelEstimates estimates_from_directory(std::string name, const std::filesystem::path& dir);
ModelEstimates estimates_from_separator(std::string name, SeparatorPtr sep);

struct StimulusConfig {
  std::size_t segments_per_song = 4;
  double segment_seconds = kDefaultSegmentSeconds;
  double min_gap_seconds = 0.0;
  std::uint64_t seed = 0;  // salts the opaque clip ids
};

// Renders, per model x song x segment x class, an extraction clip and a
// residual clip (mixture - extraction), plus one reference mixture clip per
// segment, and writes <out_dir>/stimuli.json. Throws MissingEstimates.
StimulusStore prepare_stimuli(std::span<const ModelEstimates> models, std::span<const Song> songs,
                              const StimulusConfig& config, const std::filesystem::path& out_dir);

// --- sessions --------------------------------------------------------------------

enum class AssessorCategory { kProducer, kMusicianEducator };

std::string_view to_string(AssessorCategory category);
AssessorCategory parse_assessor_category(std::string_view text);

struct Session {
  std::string id;
  std::string assessor;
  AssessorCategory category = AssessorCategory::kProducer;
  std::string equipment;
  std::uint64_t plan_seed = 0;
  std::string started;
  SchedulePlan plan;
  std::size_t cursor = 0;  // submitted comparisons

  bool complete() const { return cursor >= plan.comparisons.size(); }
};

struct ClipRef {
  std::string id;
  std::string url;
};

// What an assessor sees. Carries no model ids.
struct ComparisonPayload {
  std::string comparison_id;
  std::size_t index = 0;
  std::size_t total = 0;
  SourceClass source = SourceClass::kVocals;
  StimulusKind kind = StimulusKind::kExtraction;
  ClipRef reference;
  ClipRef a;
  ClipRef b;
};

nlohmann::json to_json(const ComparisonPayload& payload);

struct Submission {
  std::string comparison_id;
  Choice choice = Choice::kA;
  double elapsed_seconds = 0.0;
  int switch_count = 0;
};

struct ServiceConfig {
  std::filesystem::path state_dir;  // holds sessions.jsonl and comparisons.jsonl
  std::uint64_t seed = 0;
  int per_cell = 3;
  TrueSkillParams params;
  std::function<std::string()> clock;  // ISO 8601 timestamps; defaults to UTC now
};

std::string utc_timestamp();

// The listening test backend. The comparison log is the source of truth:
// ratings and session cursors are rebuilt from it on construction.
class ListeningTest {
 public:
  ListeningTest(StimulusStore store, ServiceConfig config);

  // Returns the assessor's existing session if there is one.
  Session create_session(const std::string& assessor, AssessorCategory category,
                         const std::string& equipment = "");
  Session session(const std::string& session_id) const;

  // The next planned comparison, repeated until it is answered.
  // Throws UnknownSession, PlanExhausted.
  ComparisonPayload next_comparison(const std::string& session_id) const;

  // Appends the record, then updates ratings. Throws DuplicateSubmission,
  // UnknownComparison.
  ComparisonRecord submit_result(const Submission& submission);

  std::map<std::string, Rating> ratings() const;
  nlohmann::json standings() const;
  std::vector<ComparisonRecord> records() const;
  nlohmann::json stats() const;

  // Validated audio bytes (finite samples, expected length).
  std::string audio_bytes(const std::string& clip_id) const;

  const StimulusStore& store() const { return store_; }
  const ServiceConfig& config() const { return config_; }

  // Test hook: runs after the log append and before the rating update.
  void set_after_append_hook(std::function<void()> hook) { after_append_ = std::move(hook); }

 private:
  Session& lookup(const std::string& session_id);
  const Session& lookup(const std::string& session_id) const;
  ComparisonPayload payload_for(const Session& s, std::size_t index) const;
  ComparisonRecord record_for(const Session& s, std::size_t index, const Submission& sub) const;
  bool a_side_swapped(const Session& s, std::size_t index) const;
  void restore();

  StimulusStore store_;
  ServiceConfig config_;
  mutable std::mutex mutex_;
  std::vector<Session> sessions_;
  std::map<std::string, std::size_t> by_assessor_;
  std::vector<ComparisonRecord> log_;
  RatingBook book_;
  std::function<void()> after_append_;
};

}  // namespace sdx
