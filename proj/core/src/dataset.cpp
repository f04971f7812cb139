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

#include "sdx/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "sdx/error.hpp"

namespace sdx {

std::string_view to_string(SourceClass c) {
  switch (c) {
    case SourceClass::kVocals: return "vocals";
    case SourceClass::kBass: return "bass";
    case SourceClass::kDrums: return "drums";
    case SourceClass::kOther: return "other";
  }
  return "other";
}

SourceClass parse_source_class(std::string_view name) {
  const std::string n = Taxonomy::normalize(name);
  for (SourceClass c : kAllClasses) {
    if (n == to_string(c)) return c;
  }
  fail(Errc::kInvalidArgument, "unknown source class '" + std::string(name) + "'");
}

Stems Stems::silent(std::size_t frames) {
  Stems s;
  for (auto& b : s.by_class) b = AudioBuffer(frames);
  return s;
}

AudioBuffer Stems::sum() const {
  require_aligned("Stems::sum");
  AudioBuffer total = by_class[0];
  for (std::size_t i = 1; i < kNumClasses; ++i) total += by_class[i];
  return total;
}

void Stems::require_aligned(std::string_view what) const {
  for (std::size_t i = 1; i < kNumClasses; ++i) require_same_length(by_class[0], by_class[i], what);
}

Taxonomy Taxonomy::default_taxonomy() {
  Taxonomy t;
  t.add("vocals", SourceClass::kVocals);
  t.add("bass", SourceClass::kBass);
  t.add("drums", SourceClass::kDrums);
  t.add("percussion", SourceClass::kDrums);
  for (auto label : {"guitar", "piano", "keys", "strings", "winds", "fx", "other"}) {
    t.add(label, SourceClass::kOther);
  }
  return t;
}

std::string Taxonomy::normalize(std::string_view label) {
  auto begin = label.begin();
  auto end = label.end();
  while (begin != end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
  while (end != begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) --end;
  std::string out;
  out.reserve(static_cast<std::size_t>(end - begin));
  for (auto it = begin; it != end; ++it) {
    const auto ch = static_cast<unsigned char>(*it);
    out.push_back((ch == ' ' || ch == '-') ? '_' : static_cast<char>(std::tolower(ch)));
  }
  return out;
}

void Taxonomy::add(std::string_view label, SourceClass c) {
  const std::string key = normalize(label);
  if (key.empty()) fail(Errc::kSchemaError, "taxonomy label must be non-empty");
  entries_[key] = c;
}

std::optional<SourceClass> Taxonomy::find(std::string_view label) const {
  if (auto it = entries_.find(normalize(label)); it != entries_.end()) return it->second;
  return std::nullopt;
}

SourceClass Taxonomy::resolve(std::string_view label) const {
  if (auto c = find(label)) return *c;
  fail(Errc::kUnknownLabel, "label '" + std::string(label) + "' is not in the taxonomy");
}

Stems group_stems(std::span<const RawStem> raw, const Taxonomy& taxonomy) {
  if (raw.empty()) fail(Errc::kEmptyInput, "group_stems: no stems to group");
  const std::size_t frames = raw.front().audio.frames();
  for (const auto& stem : raw) {
    if (stem.label.empty()) fail(Errc::kSchemaError, "group_stems: stem with empty label");
    taxonomy.resolve(stem.label);
    require_same_length(raw.front().audio, stem.audio, "group_stems(" + stem.label + ")");
  }
  Stems out = Stems::silent(frames);
  for (const auto& stem : raw) out[taxonomy.resolve(stem.label)] += stem.audio;
  return out;
}

Song group_song(const RawSong& raw, const Taxonomy& taxonomy) {
  Song song;
  song.id = raw.id;
  song.stems = group_stems(raw.stems, taxonomy);
  song.mixture = raw.mixture;
  return song;
}

ConsistencyReport check_mixture_consistency(const Song& song, double tolerance) {
  ConsistencyReport report;
  if (!song.mixture) return report;
  const AudioBuffer sum = song.stems.sum();
  if (sum.frames() != song.mixture->frames()) {
    report.consistent = false;
    report.max_error = std::numeric_limits<double>::infinity();
    return report;
  }
  report.max_error = max_abs_diff(sum, *song.mixture);
  report.consistent = report.max_error <= tolerance;
  return report;
}

}  // namespace sdx
