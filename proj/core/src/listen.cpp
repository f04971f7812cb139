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

#include "sdx/listen.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "sdx/error.hpp"
#include "sdx/evaluator.hpp"
#include "sdx/manifest.hpp"
#include "sdx/rng.hpp"
#include "sdx/wav.hpp"

namespace sdx {
namespace fs = std::filesystem;

namespace {

std::string hex_id(char prefix, std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%c%016llx", prefix, static_cast<unsigned long long>(v));
  return buf;
}

std::string stimulus_key(const std::string& model, std::size_t slot, SourceClass source, StimulusKind kind) {
  return model + "|" + std::to_string(slot) + "|" + std::string(to_string(source)) + "|" +
         std::string(to_string(kind));
}

}  // namespace

// --- store ---------------------------------------------------------------------

void StimulusStore::index() {
  clips_.clear();
  by_key_.clear();
  for (const auto& slot : slots) {
    clips_[slot.reference_id] = {slot.reference_path, slot.bounds.end - slot.bounds.start};
  }
  for (std::size_t i = 0; i < stimuli.size(); ++i) {
    const auto& s = stimuli[i];
    if (s.slot >= slots.size()) fail(Errc::kSchemaError, "stimulus '" + s.id + "' names a missing slot");
    const auto& b = slots[s.slot].bounds;
    if (!clips_.emplace(s.id, std::make_pair(s.path, b.end - b.start)).second) {
      fail(Errc::kSchemaError, "duplicate clip id '" + s.id + "'");
    }
    by_key_[stimulus_key(s.model, s.slot, s.source, s.kind)] = i;
  }
}

const Stimulus& StimulusStore::find(const std::string& model, std::size_t slot, SourceClass source,
                                    StimulusKind kind) const {
  const auto it = by_key_.find(stimulus_key(model, slot, source, kind));
  if (it == by_key_.end()) fail(Errc::kMissingFile, "no stimulus for " + stimulus_key(model, slot, source, kind));
  return stimuli[it->second];
}

fs::path StimulusStore::clip_path(const std::string& id) const {
  const auto it = clips_.find(id);
  if (it == clips_.end()) fail(Errc::kInvalidArgument, "unknown clip '" + id + "'");
  return root / it->second.first;
}

std::size_t StimulusStore::clip_frames(const std::string& id) const {
  const auto it = clips_.find(id);
  if (it == clips_.end()) fail(Errc::kInvalidArgument, "unknown clip '" + id + "'");
  return it->second.second;
}

nlohmann::json StimulusStore::to_json() const {
  nlohmann::json js_slots = nlohmann::json::array();
  for (const auto& s : slots) {
    js_slots.push_back({{"index", s.index},
                        {"song", s.song},
                        {"segment", s.segment},
                        {"start", s.bounds.start},
                        {"end", s.bounds.end},
                        {"reference", {{"id", s.reference_id}, {"path", s.reference_path.generic_string()}}}});
  }
  nlohmann::json js_stimuli = nlohmann::json::array();
  for (const auto& s : stimuli) {
    js_stimuli.push_back({{"id", s.id},
                          {"slot", s.slot},
                          {"source", std::string(to_string(s.source))},
                          {"kind", std::string(to_string(s.kind))},
                          {"model", s.model},
                          {"path", s.path.generic_string()}});
  }
  return {{"version", 1}, {"models", models}, {"slots", js_slots}, {"stimuli", js_stimuli}};
}

StimulusStore StimulusStore::from_json(const nlohmann::json& doc, const fs::path& root) {
  StimulusStore store;
  store.root = root;
  try {
    store.models = doc.at("models").get<std::vector<std::string>>();
    for (const auto& s : doc.at("slots")) {
      SegmentSlot slot;
      slot.index = s.at("index").get<std::size_t>();
      slot.song = s.at("song").get<std::string>();
      slot.segment = s.at("segment").get<int>();
      slot.bounds = {s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>()};
      slot.reference_id = s.at("reference").at("id").get<std::string>();
      slot.reference_path = s.at("reference").at("path").get<std::string>();
      if (slot.index != store.slots.size() || slot.bounds.end <= slot.bounds.start) {
        fail(Errc::kSchemaError, "stimuli.json: malformed slot " + std::to_string(slot.index));
      }
      store.slots.push_back(std::move(slot));
    }
    for (const auto& s : doc.at("stimuli")) {
      Stimulus st;
      st.id = s.at("id").get<std::string>();
      st.slot = s.at("slot").get<std::size_t>();
      st.source = parse_source_class(s.at("source").get<std::string>());
      st.kind = parse_stimulus_kind(s.at("kind").get<std::string>());
      st.model = s.at("model").get<std::string>();
      st.path = s.at("path").get<std::string>();
      store.stimuli.push_back(std::move(st));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kSchemaError, std::string("stimuli.json: ") + e.what());
  }
  store.index();
  return store;
}

StimulusStore StimulusStore::load(const fs::path& root) {
  const fs::path path = root / "stimuli.json";
  if (!fs::exists(path)) fail(Errc::kMissingFile, "no stimulus index at " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kSchemaError, path.string() + ": " + e.what());
  }
  return from_json(doc, root);
}

ModelEstimates estimates_from_directory(std::string name, const fs::path& dir) {
  return {std::move(name), [dir](const Song& song) { return load_estimates(dir / song.id); }};
}

ModelEstimates estimates_from_separator(std::string name, SeparatorPtr sep) {
  return {std::move(name), [sep](const Song& song) { return sep->separate(song.mix()); }};
}

StimulusStore prepare_stimuli(std::span<const ModelEstimates> models, std::span<const Song> songs,
                              const StimulusConfig& config, const fs::path& out_dir) {
  if (models.empty()) fail(Errc::kTooFewModels, "no models to render stimuli for");
  if (songs.empty()) fail(Errc::kEmptyInput, "no songs to render stimuli for");
  StimulusStore store;
  store.root = out_dir;
  for (const auto& m : models) store.models.push_back(m.name);
  fs::create_directories(out_dir);

  for (const Song& song : songs) {
    const AudioBuffer mix = song.mix();
    const auto segments =
        select_segments(mix, config.segments_per_song, config.segment_seconds, config.min_gap_seconds);
    const std::size_t first_slot = store.slots.size();
    for (std::size_t k = 0; k < segments.size(); ++k) {
      SegmentSlot slot;
      slot.index = store.slots.size();
      slot.song = song.id;
      slot.segment = static_cast<int>(k);
      slot.bounds = segments[k];
      slot.reference_id = hex_id('r', fnv1a64(std::to_string(config.seed) + "|ref|" + song.id + "|" +
                                              std::to_string(k)));
      slot.reference_path = fs::path("clips") / (slot.reference_id + ".wav");
      fs::create_directories(out_dir / "clips");
      save_wav(mix.slice(static_cast<std::ptrdiff_t>(slot.bounds.start), slot.bounds.end - slot.bounds.start),
               out_dir / slot.reference_path, WavFormat::kFloat32);
      store.slots.push_back(std::move(slot));
    }
    for (const auto& model : models) {
      Stems est;
      try {
        est = model.estimate(song);
      } catch (const Error& e) {
        if (e.code() == Errc::kMissingEstimates || e.code() == Errc::kMissingFile) {
          fail(Errc::kMissingEstimates, "model '" + model.name + "' has no estimates for '" + song.id + "': " + e.what());
        }
        throw;
      }
      for (SourceClass c : kAllClasses) {
        if (est[c].frames() != mix.frames()) {
          fail(Errc::kLengthMismatch, "model '" + model.name + "' estimate for '" + song.id + "' has the wrong length");
        }
      }
      for (std::size_t k = 0; k < segments.size(); ++k) {
        const std::size_t slot = first_slot + k;
        const auto start = static_cast<std::ptrdiff_t>(segments[k].start);
        const std::size_t len = segments[k].end - segments[k].start;
        const AudioBuffer ref = mix.slice(start, len);
        for (SourceClass c : kAllClasses) {
          const AudioBuffer extraction = est[c].slice(start, len);
          for (StimulusKind kind : kAllStimulusKinds) {
            Stimulus st;
            st.slot = slot;
            st.source = c;
            st.kind = kind;
            st.model = model.name;
            st.id = hex_id('s', fnv1a64(std::to_string(config.seed) + "|" +
                                        stimulus_key(model.name, slot, c, kind)));
            st.path = fs::path("clips") / (st.id + ".wav");
            const AudioBuffer clip = kind == StimulusKind::kExtraction ? extraction : residual(ref, extraction);
            save_wav(clip, out_dir / st.path, WavFormat::kFloat32);
            store.stimuli.push_back(std::move(st));
          }
        }
      }
    }
  }
  store.index();
  write_text_file(out_dir / "stimuli.json", dump_json(store.to_json()));
  return store;
}

// --- sessions --------------------------------------------------------------------

std::string_view to_string(AssessorCategory category) {
  return category == AssessorCategory::kProducer ? "producer" : "musician_educator";
}

AssessorCategory parse_assessor_category(std::string_view text) {
  std::string t;
  for (char ch : text) {
    if (ch != '_' && ch != '-' && ch != ' ') t += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  if (t == "producer") return AssessorCategory::kProducer;
  if (t == "musicianeducator" || t == "musician" || t == "educator") return AssessorCategory::kMusicianEducator;
  fail(Errc::kInvalidArgument, "unknown assessor category '" + std::string(text) + "'");
}

nlohmann::json to_json(const ComparisonPayload& p) {
  auto clip = [](const ClipRef& c) { return nlohmann::json{{"id", c.id}, {"url", c.url}}; };
  return {{"comparison_id", p.comparison_id},
          {"index", p.index},
          {"total", p.total},
          {"source", std::string(to_string(p.source))},
          {"kind", std::string(to_string(p.kind))},
          {"reference", clip(p.reference)},
          {"a", clip(p.a)},
          {"b", clip(p.b)}};
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

constexpr const char* kSessionsFile = "sessions.jsonl";
constexpr const char* kLogFile = "comparisons.jsonl";

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) fail(Errc::kIoError, "cannot append to " + path.string());
  out << line;
  out.flush();
  if (!out) fail(Errc::kIoError, "write to " + path.string() + " failed");
}

nlohmann::json session_json(const Session& s) {
  return {{"id", s.id},
          {"assessor", s.assessor},
          {"category", std::string(to_string(s.category))},
          {"equipment", s.equipment},
          {"plan_seed", s.plan_seed},
          {"started", s.started}};
}

}  // namespace

ListeningTest::ListeningTest(StimulusStore store, ServiceConfig config)
    : store_(std::move(store)), config_(std::move(config)), book_(config_.params) {
  if (store_.models.size() < 2) fail(Errc::kTooFewModels, "a listening test needs at least two models");
  if (store_.slots.empty()) fail(Errc::kEmptyInput, "stimulus store has no segments");
  if (!config_.clock) config_.clock = utc_timestamp;
  fs::create_directories(config_.state_dir);
  restore();
}

void ListeningTest::restore() {
  for (const auto& m : store_.models) book_.add_model(m);
  auto plan_for = [&](std::uint64_t seed) {
    return schedule_comparisons(store_.models, ScheduleConfig{config_.per_cell, kNumClasses, 2, store_.slots.size()},
                                seed);
  };
  const fs::path sessions_path = config_.state_dir / kSessionsFile;
  if (fs::exists(sessions_path)) {
    const std::string text = read_text_file(sessions_path);
    std::size_t pos = 0;
    while (pos < text.size()) {
      const auto nl = text.find('\n', pos);
      const std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
      pos = nl == std::string::npos ? text.size() : nl + 1;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      Session s;
      try {
        const auto doc = nlohmann::json::parse(line);
        s.id = doc.at("id").get<std::string>();
        s.assessor = doc.at("assessor").get<std::string>();
        s.category = parse_assessor_category(doc.at("category").get<std::string>());
        s.equipment = doc.value("equipment", std::string());
        s.plan_seed = doc.at("plan_seed").get<std::uint64_t>();
        s.started = doc.value("started", std::string());
      } catch (const nlohmann::json::exception& e) {
        fail(Errc::kSchemaError, std::string("sessions.jsonl: ") + e.what());
      }
      s.plan = plan_for(s.plan_seed);
      by_assessor_[s.assessor] = sessions_.size();
      sessions_.push_back(std::move(s));
    }
  }
  const fs::path log_path = config_.state_dir / kLogFile;
  if (fs::exists(log_path)) {
    log_ = parse_comparison_log(read_text_file(log_path));
    for (const auto& r : log_) {
      const auto it = by_assessor_.find(r.assessor);
      if (it == by_assessor_.end()) fail(Errc::kLogMismatch, "log names unknown assessor '" + r.assessor + "'");
      Session& s = sessions_[it->second];
      if (s.complete()) fail(Errc::kLogMismatch, "log holds more comparisons than the plan of '" + r.assessor + "'");
      const auto& planned = s.plan.comparisons[s.cursor];
      const std::string& a = r.model_a;
      const std::string& b = r.model_b;
      const bool same_pair = (a == planned.model_a && b == planned.model_b) ||
                             (a == planned.model_b && b == planned.model_a);
      if (!same_pair || r.source != planned.source || r.stimulus != planned.stimulus) {
        fail(Errc::kLogMismatch, "log record " + std::to_string(s.cursor) + " of '" + r.assessor +
                                     "' does not match its plan");
      }
      book_.apply(r);
      ++s.cursor;
    }
  }
}

Session ListeningTest::create_session(const std::string& assessor, AssessorCategory category,
                                      const std::string& equipment) {
  if (assessor.empty()) fail(Errc::kInvalidArgument, "assessor id must not be empty");
  std::lock_guard lock(mutex_);
  if (const auto it = by_assessor_.find(assessor); it != by_assessor_.end()) return sessions_[it->second];
  Session s;
  char id[32];
  std::snprintf(id, sizeof id, "session-%04zu", sessions_.size() + 1);
  s.id = id;
  s.assessor = assessor;
  s.category = category;
  s.equipment = equipment;
  s.plan_seed = derive_seed(config_.seed, fnv1a64(assessor));
  s.started = config_.clock();
  s.plan = schedule_comparisons(store_.models, ScheduleConfig{config_.per_cell, kNumClasses, 2, store_.slots.size()},
                                s.plan_seed);
  append_line(config_.state_dir / kSessionsFile, session_json(s).dump() + "\n");
  by_assessor_[assessor] = sessions_.size();
  sessions_.push_back(s);
  return s;
}

Session& ListeningTest::lookup(const std::string& session_id) {
  for (auto& s : sessions_) {
    if (s.id == session_id) return s;
  }
  fail(Errc::kUnknownSession, "unknown session '" + session_id + "'");
}

const Session& ListeningTest::lookup(const std::string& session_id) const {
  return const_cast<ListeningTest*>(this)->lookup(session_id);
}

Session ListeningTest::session(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  return lookup(session_id);
}

bool ListeningTest::a_side_swapped(const Session& s, std::size_t index) const {
  Rng rng(derive_seed(s.plan_seed ^ 0x5349444553ULL, index));
  return rng.coin();
}

ComparisonPayload ListeningTest::payload_for(const Session& s, std::size_t index) const {
  const auto& planned = s.plan.comparisons[index];
  const bool swap = a_side_swapped(s, index);
  const std::string& model_a = swap ? planned.model_b : planned.model_a;
  const std::string& model_b = swap ? planned.model_a : planned.model_b;
  const auto& a = store_.find(model_a, planned.slot, planned.source, planned.stimulus);
  const auto& b = store_.find(model_b, planned.slot, planned.source, planned.stimulus);
  const auto& slot = store_.slots[planned.slot];
  ComparisonPayload p;
  p.comparison_id = s.id + ":" + std::to_string(index);
  p.index = index;
  p.total = s.plan.comparisons.size();
  p.source = planned.source;
  p.kind = planned.stimulus;
  p.reference = {slot.reference_id, "/audio/" + slot.reference_id};
  p.a = {a.id, "/audio/" + a.id};
  p.b = {b.id, "/audio/" + b.id};
  return p;
}

ComparisonPayload ListeningTest::next_comparison(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const Session& s = lookup(session_id);
  if (s.complete()) fail(Errc::kPlanExhausted, "session '" + session_id + "' has completed its plan");
  return payload_for(s, s.cursor);
}

ComparisonRecord ListeningTest::record_for(const Session& s, std::size_t index, const Submission& sub) const {
  const auto& planned = s.plan.comparisons[index];
  const bool swap = a_side_swapped(s, index);
  ComparisonRecord r;
  r.assessor = s.assessor;
  r.model_a = swap ? planned.model_b : planned.model_a;
  r.model_b = swap ? planned.model_a : planned.model_b;
  r.song = store_.slots[planned.slot].song;
  r.segment = store_.slots[planned.slot].segment;
  r.source = planned.source;
  r.stimulus = planned.stimulus;
  r.choice = sub.choice;
  r.elapsed_seconds = sub.elapsed_seconds;
  r.switch_count = sub.switch_count;
  r.timestamp = config_.clock();
  validate(r);
  return r;
}

ComparisonRecord ListeningTest::submit_result(const Submission& sub) {
  const auto colon = sub.comparison_id.rfind(':');
  if (colon == std::string::npos) fail(Errc::kUnknownComparison, "malformed comparison id '" + sub.comparison_id + "'");
  const std::string session_id = sub.comparison_id.substr(0, colon);
  std::size_t index = 0;
  try {
    std::size_t used = 0;
    index = std::stoul(sub.comparison_id.substr(colon + 1), &used);
    if (used != sub.comparison_id.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    fail(Errc::kUnknownComparison, "malformed comparison id '" + sub.comparison_id + "'");
  }

  std::lock_guard lock(mutex_);
  Session* s = nullptr;
  for (auto& candidate : sessions_) {
    if (candidate.id == session_id) s = &candidate;
  }
  if (!s) fail(Errc::kUnknownComparison, "comparison '" + sub.comparison_id + "' belongs to no session");
  if (index < s->cursor) fail(Errc::kDuplicateSubmission, "comparison '" + sub.comparison_id + "' was already answered");
  if (index != s->cursor || s->complete()) {
    fail(Errc::kUnknownComparison, "comparison '" + sub.comparison_id + "' is not outstanding");
  }
  const ComparisonRecord r = record_for(*s, index, sub);
  append_line(config_.state_dir / kLogFile, to_jsonl(r));
  log_.push_back(r);
  if (after_append_) after_append_();
  book_.apply(r);
  ++s->cursor;
  return r;
}

std::map<std::string, Rating> ListeningTest::ratings() const {
  std::lock_guard lock(mutex_);
  return book_.ratings();
}

nlohmann::json ListeningTest::standings() const {
  std::lock_guard lock(mutex_);
  return standings_json(book_);
}

std::vector<ComparisonRecord> ListeningTest::records() const {
  std::lock_guard lock(mutex_);
  return log_;
}

nlohmann::json ListeningTest::stats() const {
  std::lock_guard lock(mutex_);
  if (log_.empty()) return {{"comparisons", 0}};
  std::map<std::string, std::string> categories;
  for (const auto& s : sessions_) categories[s.assessor] = std::string(to_string(s.category));
  return to_json(assessor_stats(log_, categories));
}

std::string ListeningTest::audio_bytes(const std::string& clip_id) const {
  const fs::path path = store_.clip_path(clip_id);
  const std::string bytes = read_text_file(path);
  const AudioBuffer audio = decode_wav(bytes);
  if (!audio.all_finite()) fail(Errc::kInvalidAudio, "clip '" + clip_id + "' holds non-finite samples");
  if (audio.frames() != store_.clip_frames(clip_id)) {
    fail(Errc::kInvalidAudio, "clip '" + clip_id + "' has " + std::to_string(audio.frames()) + " frames, expected " +
                                  std::to_string(store_.clip_frames(clip_id)));
  }
  return bytes;
}

}  // namespace sdx
