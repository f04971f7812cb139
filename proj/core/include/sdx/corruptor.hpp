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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdx/dataset.hpp"
#include "sdx/filter.hpp"
#include "sdx/manifest.hpp"
#include "sdx/rng.hpp"

namespace sdx {

// Row-stochastic instrument confusion statistics: row = true label,
// column = label it gets mistaken for.
class ConfusionMatrix {
 public:
  ConfusionMatrix(std::vector<std::string> labels, std::vector<std::vector<double>> rows);

  // Ten-instrument default. Only guitar->bass = 0.32 is a measured rate;
  // every other entry is a synthetic placeholder with zero diagonal.
  static ConfusionMatrix default_matrix();
  static ConfusionMatrix identity(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const { return labels_; }
  bool contains(std::string_view label) const;
  std::size_t index_of(std::string_view label) const;  // throws UnknownLabel
  std::span<const double> row(std::string_view label) const;
  double probability(std::string_view from, std::string_view to) const;

  nlohmann::json to_json() const;
  static ConfusionMatrix from_json(const nlohmann::json& doc);

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<double>> rows_;
};

struct LabelNoiseConfig {
  double rate = 0.20;
  ConfusionMatrix confusion = ConfusionMatrix::default_matrix();
  std::uint64_t seed = 0;
};

// Uniform ranges for bleeding. Lowpass cutoffs are drawn from the half-open
// [min, max); every other range is closed.
struct BleedConfig {
  double gain_db_min = -12.0;
  double gain_db_max = -7.0;
  int order_min = 3;
  int order_max = 9;
  double lowpass_min_hz = 900.0;
  double lowpass_max_hz = 9000.0;
  double bandpass_low_min_hz = 200.0;
  double bandpass_low_max_hz = 600.0;
  double bandpass_high_min_hz = 8000.0;
  double bandpass_high_max_hz = 10000.0;
  std::uint64_t seed = 0;
};

void validate(const BleedConfig& config);

enum class CorruptionKind { kRelabel, kBleed };

// One logged corruption. Relabel records name the raw stem and its old/new
// label; bleed records name the (source, destination) class pair and every
// random draw, which is enough to re-render the injected component.
struct CorruptionRecord {
  CorruptionKind kind = CorruptionKind::kRelabel;
  std::string song_id;
  std::string stem;  // raw stem path or "<label>#<index>", or destination class

  std::size_t stem_index = 0;
  std::string from_label;
  std::string to_label;

  SourceClass source = SourceClass::kVocals;
  SourceClass destination = SourceClass::kVocals;
  double gain_db = 0.0;
  FilterSpec filter;

  bool operator==(const CorruptionRecord&) const = default;
};

using CorruptionLog = std::vector<CorruptionRecord>;

nlohmann::json to_json(const CorruptionRecord& record);
CorruptionRecord record_from_json(const nlohmann::json& doc);
std::string to_jsonl(const CorruptionLog& log);
CorruptionLog parse_jsonl_log(std::string_view text);

// --- label noise -----------------------------------------------------------

// Relabels each label independently with probability `rate`; the new label is
// drawn from the confusion row of the old one. Draw order per stem: one
// Bernoulli draw, then one categorical draw only if selected.
std::vector<std::string> relabel(std::span<const std::string> labels, double rate,
                                 const ConfusionMatrix& confusion, Rng& rng);

struct LabelNoiseResult {
  std::vector<RawSong> songs;  // raw stems carrying their new labels
  CorruptionLog log;           // one record per stem whose label changed
};

// Song i uses sub-seed derive_seed(config.seed, i). Audio is untouched.
LabelNoiseResult corrupt_label_noise(std::span<const RawSong> songs, const LabelNoiseConfig& config);

struct DatasetOutput {
  Manifest manifest;
  CorruptionLog log;
};

// Manifest-level driver: relabels the raw stems of `clean`, groups them into
// four classes and writes <out_dir>/<song>/<class>.wav plus manifest.json.
DatasetOutput corrupt_label_noise(const Manifest& clean, const LabelNoiseConfig& config,
                                  const std::filesystem::path& out_dir, int jobs = 1);

// Fraction of four-class stems whose set of member raw stems changed.
// Throws LogMismatch when a record does not match the clean dataset.
double effective_corruption_fraction(const CorruptionLog& log, std::span<const RawSong> clean,
                                     const Taxonomy& taxonomy = Taxonomy::default_taxonomy());
double effective_corruption_fraction(const CorruptionLog& log, const Manifest& clean);

// Class stems that received a raw stem whose true class is different, keyed
// as (song index, class). Used as ground truth for stem cleaning.
std::vector<std::array<bool, kNumClasses>> contaminated_stems(const CorruptionLog& log,
                                                              std::span<const RawSong> clean,
                                                              const Taxonomy& taxonomy);

// --- bleeding --------------------------------------------------------------

// gain then filter, as logged.
AudioBuffer render_bleed(const AudioBuffer& clean_source, const CorruptionRecord& record);

// Every stem bleeds into every other stem of the song: for destination d and
// source s != d (both in class order) draw gain, filter kind, order, then
// cutoffs low to high, and add filter(gain(clean s)) to d.
Song bleed_song(const Song& clean, const BleedConfig& config, std::uint64_t song_seed,
                CorruptionLog& log);

struct BleedResult {
  std::vector<Song> songs;  // corrupted stems; mixture unset (sum of stems)
  CorruptionLog log;
  // Corrupted stems checked against each song's original mixture.
  std::vector<ConsistencyReport> original_mixture;
};

BleedResult corrupt_bleeding(std::span<const Song> songs, const BleedConfig& config);

DatasetOutput corrupt_bleeding(const Manifest& clean, const BleedConfig& config,
                               const std::filesystem::path& out_dir, int jobs = 1);

}  // namespace sdx
