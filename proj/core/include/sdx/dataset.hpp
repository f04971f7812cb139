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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdx/audio.hpp"

namespace sdx {

// The four challenge targets.
enum class SourceClass : int { kVocals = 0, kBass = 1, kDrums = 2, kOther = 3 };

inline constexpr std::size_t kNumClasses = 4;
inline constexpr std::array<SourceClass, kNumClasses> kAllClasses = {
    SourceClass::kVocals, SourceClass::kBass, SourceClass::kDrums, SourceClass::kOther};

std::string_view to_string(SourceClass c);
SourceClass parse_source_class(std::string_view name);
constexpr std::size_t index_of(SourceClass c) { return static_cast<std::size_t>(c); }

// One buffer per source class, all of equal length.
struct Stems {
  std::array<AudioBuffer, kNumClasses> by_class;

  static Stems silent(std::size_t frames);

  AudioBuffer& operator[](SourceClass c) { return by_class[index_of(c)]; }
  const AudioBuffer& operator[](SourceClass c) const { return by_class[index_of(c)]; }

  std::size_t frames() const { return by_class[0].frames(); }
  // Sample-wise sum over the four classes.
  AudioBuffer sum() const;
  // Throws LengthMismatch if the classes differ in length.
  void require_aligned(std::string_view what) const;

  bool operator==(const Stems&) const = default;
};

// Instrument label -> source class. Lookups normalize the label first
// (lower case, trimmed, '-' and ' ' folded to '_'). Unknown labels are an
// error; nothing falls back to Other implicitly.
class Taxonomy {
 public:
  Taxonomy() = default;

  // vocals, bass, drums, guitar, piano, keys, strings, winds, percussion, fx
  // (plus "other" so four-class manifests resolve).
  static Taxonomy default_taxonomy();
  static std::string normalize(std::string_view label);

  void add(std::string_view label, SourceClass c);
  std::optional<SourceClass> find(std::string_view label) const;
  SourceClass resolve(std::string_view label) const;

  const std::map<std::string, SourceClass>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  bool operator==(const Taxonomy&) const = default;

 private:
  std::map<std::string, SourceClass> entries_;
};

// The ten instrument labels of the default taxonomy, in confusion-matrix order.
inline constexpr std::array<std::string_view, 10> kDefaultInstruments = {
    "vocals", "bass", "drums", "guitar", "piano", "keys", "strings", "winds", "percussion", "fx"};

struct RawStem {
  std::string label;
  AudioBuffer audio;
};

struct Song {
  std::string id;
  Stems stems;
  // Stored mixture, when the dataset ships one. Absent means "sum of stems".
  std::optional<AudioBuffer> mixture;

  AudioBuffer mix() const { return mixture ? *mixture : stems.sum(); }
};

// A song before class grouping: labelled instrument recordings.
struct RawSong {
  std::string id;
  std::vector<RawStem> stems;
  std::optional<AudioBuffer> mixture;
};

// Sums raw stems into their taxonomy classes; classes without members are
// silent. Throws UnknownLabel / LengthMismatch / EmptyInput.
Stems group_stems(std::span<const RawStem> raw, const Taxonomy& taxonomy);

struct ConsistencyReport {
  bool consistent = true;
  double max_error = 0.0;
};

// Compares the stored mixture against the sum of the stems. A song without a
// stored mixture is consistent by definition. Never throws for a valid song.
ConsistencyReport check_mixture_consistency(const Song& song, double tolerance);

// Groups every stem of a raw song into a four-class song.
Song group_song(const RawSong& raw, const Taxonomy& taxonomy);

}  // namespace sdx
