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

#include "sdx/corruptor.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "sdx/error.hpp"
#include "sdx/parallel.hpp"
#include "sdx/wav.hpp"

namespace sdx {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kRowTolerance = 1e-9;
constexpr double kConsistencyTolerance = 1e-6;

}  // namespace

// --- ConfusionMatrix ---------------------------------------------------------

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels, std::vector<std::vector<double>> rows)
    : labels_(std::move(labels)), rows_(std::move(rows)) {
  if (labels_.empty()) fail(Errc::kInvalidArgument, "confusion matrix needs at least one label");
  if (rows_.size() != labels_.size()) fail(Errc::kInvalidArgument, "confusion matrix must be square");
  std::set<std::string> seen;
  for (auto& l : labels_) {
    l = Taxonomy::normalize(l);
    if (!seen.insert(l).second) fail(Errc::kInvalidArgument, "duplicate confusion label '" + l + "'");
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != labels_.size()) fail(Errc::kInvalidArgument, "confusion matrix must be square");
    double sum = 0.0;
    for (double p : rows_[i]) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        fail(Errc::kInvalidArgument, "confusion row '" + labels_[i] + "' has a negative or non-finite entry");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowTolerance) {
      fail(Errc::kInvalidArgument, "confusion row '" + labels_[i] + "' sums to " + std::to_string(sum));
    }
  }
}

ConfusionMatrix ConfusionMatrix::default_matrix() {
  // Columns follow kDefaultInstruments:
  //   vocals bass drums guitar piano keys strings winds percussion fx
  std::vector<std::string> labels(kDefaultInstruments.begin(), kDefaultInstruments.end());
  std::vector<std::vector<double>> rows = {
      {0.00, 0.05, 0.05, 0.15, 0.05, 0.15, 0.10, 0.10, 0.05, 0.30},  // vocals
      {0.05, 0.00, 0.05, 0.40, 0.10, 0.20, 0.05, 0.03, 0.02, 0.10},  // bass
      {0.02, 0.08, 0.00, 0.04, 0.03, 0.05, 0.02, 0.01, 0.55, 0.20},  // drums
      {0.08, 0.32, 0.04, 0.00, 0.12, 0.18, 0.08, 0.05, 0.03, 0.10},  // guitar
      {0.05, 0.08, 0.03, 0.15, 0.00, 0.45, 0.10, 0.05, 0.02, 0.07},  // piano
      {0.06, 0.08, 0.02, 0.15, 0.35, 0.00, 0.15, 0.05, 0.02, 0.12},  // keys
      {0.10, 0.06, 0.02, 0.10, 0.12, 0.30, 0.00, 0.20, 0.02, 0.08},  // strings
      {0.15, 0.04, 0.02, 0.10, 0.07, 0.20, 0.30, 0.00, 0.02, 0.10},  // winds
      {0.03, 0.05, 0.60, 0.05, 0.03, 0.05, 0.02, 0.02, 0.00, 0.15},  // percussion
      {0.12, 0.05, 0.15, 0.10, 0.05, 0.25, 0.08, 0.05, 0.15, 0.00},  // fx
  };
  return ConfusionMatrix(std::move(labels), std::move(rows));
}

ConfusionMatrix ConfusionMatrix::identity(std::vector<std::string> labels) {
  std::vector<std::vector<double>> rows(labels.size(), std::vector<double>(labels.size(), 0.0));
  for (std::size_t i = 0; i < labels.size(); ++i) rows[i][i] = 1.0;
  return ConfusionMatrix(std::move(labels), std::move(rows));
}

bool ConfusionMatrix::contains(std::string_view label) const {
  const std::string key = Taxonomy::normalize(label);
  return std::find(labels_.begin(), labels_.end(), key) != labels_.end();
}

std::size_t ConfusionMatrix::index_of(std::string_view label) const {
  const std::string key = Taxonomy::normalize(label);
  const auto it = std::find(labels_.begin(), labels_.end(), key);
  if (it == labels_.end()) fail(Errc::kUnknownLabel, "label '" + std::string(label) + "' missing from confusion matrix");
  return static_cast<std::size_t>(it - labels_.begin());
}

std::span<const double> ConfusionMatrix::row(std::string_view label) const { return rows_[index_of(label)]; }

double ConfusionMatrix::probability(std::string_view from, std::string_view to) const {
  return rows_[index_of(from)][index_of(to)];
}

json ConfusionMatrix::to_json() const {
  json rows = json::object();
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    json row = json::object();
    for (std::size_t j = 0; j < labels_.size(); ++j) row[labels_[j]] = rows_[i][j];
    rows[labels_[i]] = std::move(row);
  }
  return json{{"labels", labels_}, {"rows", std::move(rows)}};
}

ConfusionMatrix ConfusionMatrix::from_json(const json& doc) {
  try {
    auto labels = doc.at("labels").get<std::vector<std::string>>();
    std::vector<std::vector<double>> rows;
    for (const auto& from : labels) {
      std::vector<double> row;
      const json& r = doc.at("rows").at(from);
      for (const auto& to : labels) row.push_back(r.value(to, 0.0));
      rows.push_back(std::move(row));
    }
    return ConfusionMatrix(std::move(labels), std::move(rows));
  } catch (const json::exception& e) {
    fail(Errc::kSchemaError, std::string("confusion matrix: ") + e.what());
  }
}

// --- log serialization --------------------------------------------------------

json to_json(const CorruptionRecord& r) {
  json j;
  j["song_id"] = r.song_id;
  j["stem"] = r.stem;
  if (r.kind == CorruptionKind::kRelabel) {
    j["kind"] = "relabel";
    j["stem_index"] = r.stem_index;
    j["from"] = r.from_label;
    j["to"] = r.to_label;
  } else {
    j["kind"] = "bleed";
    j["source"] = std::string(to_string(r.source));
    j["destination"] = std::string(to_string(r.destination));
    j["gain_db"] = r.gain_db;
    j["filter"] = std::string(to_string(r.filter.kind));
    j["order"] = r.filter.order;
    if (r.filter.kind == FilterKind::kBandpass) j["cutoff_low_hz"] = r.filter.cutoff_low_hz;
    j["cutoff_high_hz"] = r.filter.cutoff_high_hz;
  }
  return j;
}

CorruptionRecord record_from_json(const json& j) {
  try {
    CorruptionRecord r;
    r.song_id = j.at("song_id").get<std::string>();
    r.stem = j.at("stem").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "relabel") {
      r.kind = CorruptionKind::kRelabel;
      r.stem_index = j.at("stem_index").get<std::size_t>();
      r.from_label = j.at("from").get<std::string>();
      r.to_label = j.at("to").get<std::string>();
    } else if (kind == "bleed") {
      r.kind = CorruptionKind::kBleed;
      r.source = parse_source_class(j.at("source").get<std::string>());
      r.destination = parse_source_class(j.at("destination").get<std::string>());
      r.gain_db = j.at("gain_db").get<double>();
      r.filter.kind = parse_filter_kind(j.at("filter").get<std::string>());
      r.filter.order = j.at("order").get<int>();
      r.filter.cutoff_low_hz = j.value("cutoff_low_hz", 0.0);
      r.filter.cutoff_high_hz = j.at("cutoff_high_hz").get<double>();
    } else {
      fail(Errc::kSchemaError, "corruption log: unknown kind '" + kind + "'");
    }
    return r;
  } catch (const json::exception& e) {
    fail(Errc::kSchemaError, std::string("corruption log: ") + e.what());
  }
}

std::string to_jsonl(const CorruptionLog& log) {
  std::string out;
  for (const auto& r : log) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

CorruptionLog parse_jsonl_log(std::string_view text) {
  CorruptionLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      log.push_back(record_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      fail(Errc::kSchemaError, std::string("corruption log: ") + e.what());
    }
  }
  return log;
}

// --- label noise ----------------------------------------------------------------

std::vector<std::string> relabel(std::span<const std::string> labels, double rate,
                                 const ConfusionMatrix& confusion, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) fail(Errc::kInvalidArgument, "label noise rate must lie in [0, 1]");
  for (const auto& l : labels) confusion.index_of(l);
  std::vector<std::string> out(labels.begin(), labels.end());
  for (auto& label : out) {
    if (!rng.bernoulli(rate)) continue;
    const std::size_t to = rng.categorical(confusion.row(label));
    label = confusion.labels()[to];
  }
  return out;
}

namespace {

// Relabels one song's stems and appends a record per changed label.
std::vector<std::string> relabel_song(const std::string& song_id, std::span<const std::string> labels,
                                      std::span<const std::string> stem_names, const LabelNoiseConfig& config,
                                      std::size_t song_index, CorruptionLog& log) {
  Rng rng(derive_seed(config.seed, song_index));
  auto next = relabel(labels, config.rate, config.confusion, rng);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (Taxonomy::normalize(labels[i]) == Taxonomy::normalize(next[i])) {
      next[i] = labels[i];
      continue;
    }
    CorruptionRecord r;
    r.kind = CorruptionKind::kRelabel;
    r.song_id = song_id;
    r.stem = stem_names[i];
    r.stem_index = i;
    r.from_label = labels[i];
    r.to_label = next[i];
    log.push_back(std::move(r));
  }
  return next;
}

}  // namespace

LabelNoiseResult corrupt_label_noise(std::span<const RawSong> songs, const LabelNoiseConfig& config) {
  LabelNoiseResult result;
  result.songs.assign(songs.begin(), songs.end());
  for (std::size_t s = 0; s < songs.size(); ++s) {
    std::vector<std::string> labels, names;
    for (std::size_t i = 0; i < songs[s].stems.size(); ++i) {
      labels.push_back(songs[s].stems[i].label);
      names.push_back(songs[s].stems[i].label + "#" + std::to_string(i));
    }
    const auto next = relabel_song(songs[s].id, labels, names, config, s, result.log);
    for (std::size_t i = 0; i < next.size(); ++i) result.songs[s].stems[i].label = next[i];
  }
  return result;
}

DatasetOutput corrupt_label_noise(const Manifest& clean, const LabelNoiseConfig& config,
                                  const fs::path& out_dir, int jobs) {
  const std::size_t n = clean.songs.size();
  std::vector<CorruptionLog> logs(n);
  std::vector<ManifestSong> entries(n);
  parallel_for(n, jobs, [&](std::size_t s) {
    const ManifestSong& song = clean.songs[s];
    std::vector<std::string> labels, names;
    for (const auto& ref : song.stems) {
      labels.push_back(ref.label);
      names.push_back(ref.path.generic_string());
    }
    const auto next = relabel_song(song.id, labels, names, config, s, logs[s]);
    auto raw = load_raw_stems(clean, s);
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i].label = next[i];
    Song grouped;
    grouped.id = song.id;
    grouped.stems = group_stems(raw, clean.taxonomy);
    entries[s] = write_class_song(grouped, out_dir);
  });

  DatasetOutput out;
  out.manifest.root = out_dir;
  out.manifest.taxonomy = clean.taxonomy;
  out.manifest.songs = std::move(entries);
  out.manifest.provenance.generator = "corrupt/label-noise";
  out.manifest.provenance.seed = config.seed;
  out.manifest.provenance.details = {{"rate", config.rate}, {"confusion", config.confusion.to_json()}};
  for (auto& l : logs) out.log.insert(out.log.end(), l.begin(), l.end());
  return out;
}

namespace {

struct SongLabels {
  std::string id;
  std::vector<std::string> labels;
};

template <typename Songs, typename LabelsOf>
std::vector<SongLabels> collect_labels(const Songs& songs, LabelsOf labels_of) {
  std::vector<SongLabels> out;
  for (const auto& s : songs) out.push_back({s.id, labels_of(s)});
  return out;
}

// Per song, per class: did any relabel move a stem into or out of the class?
std::vector<std::array<bool, kNumClasses>> membership_changes(const CorruptionLog& log,
                                                              const std::vector<SongLabels>& songs,
                                                              const Taxonomy& taxonomy,
                                                              bool incoming_only) {
  std::vector<std::array<bool, kNumClasses>> changed(songs.size(), std::array<bool, kNumClasses>{});
  for (const auto& r : log) {
    if (r.kind != CorruptionKind::kRelabel) fail(Errc::kLogMismatch, "log contains non-relabel records");
    const auto it = std::find_if(songs.begin(), songs.end(), [&](const SongLabels& s) { return s.id == r.song_id; });
    if (it == songs.end()) fail(Errc::kLogMismatch, "log names unknown song '" + r.song_id + "'");
    if (r.stem_index >= it->labels.size() ||
        Taxonomy::normalize(it->labels[r.stem_index]) != Taxonomy::normalize(r.from_label)) {
      fail(Errc::kLogMismatch, "log record for song '" + r.song_id + "' does not match stem " +
                                   std::to_string(r.stem_index));
    }
    const SourceClass from = taxonomy.resolve(r.from_label);
    const SourceClass to = taxonomy.resolve(r.to_label);
    if (from == to) continue;
    auto& flags = changed[static_cast<std::size_t>(it - songs.begin())];
    flags[index_of(to)] = true;
    if (!incoming_only) flags[index_of(from)] = true;
  }
  return changed;
}

double fraction_changed(const std::vector<std::array<bool, kNumClasses>>& changed) {
  if (changed.empty()) return 0.0;
  std::size_t count = 0;
  for (const auto& flags : changed) count += static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
  return static_cast<double>(count) / static_cast<double>(changed.size() * kNumClasses);
}

}  // namespace

double effective_corruption_fraction(const CorruptionLog& log, std::span<const RawSong> clean,
                                     const Taxonomy& taxonomy) {
  const auto songs = collect_labels(clean, [](const RawSong& s) {
    std::vector<std::string> l;
    for (const auto& stem : s.stems) l.push_back(stem.label);
    return l;
  });
  return fraction_changed(membership_changes(log, songs, taxonomy, false));
}

double effective_corruption_fraction(const CorruptionLog& log, const Manifest& clean) {
  const auto songs = collect_labels(clean.songs, [](const ManifestSong& s) {
    std::vector<std::string> l;
    for (const auto& ref : s.stems) l.push_back(ref.label);
    return l;
  });
  return fraction_changed(membership_changes(log, songs, clean.taxonomy, false));
}

std::vector<std::array<bool, kNumClasses>> contaminated_stems(const CorruptionLog& log,
                                                              std::span<const RawSong> clean,
                                                              const Taxonomy& taxonomy) {
  const auto songs = collect_labels(clean, [](const RawSong& s) {
    std::vector<std::string> l;
    for (const auto& stem : s.stems) l.push_back(stem.label);
    return l;
  });
  return membership_changes(log, songs, taxonomy, true);
}

// --- bleeding ---------------------------------------------------------------------

void validate(const BleedConfig& c) {
  auto in_band = [](double hz) { return hz > 0.0 && hz < kSampleRate / 2.0; };
  const bool ok = std::isfinite(c.gain_db_min) && std::isfinite(c.gain_db_max) && c.gain_db_min < c.gain_db_max &&
                  c.order_min >= kMinFilterOrder && c.order_max <= kMaxFilterOrder && c.order_min <= c.order_max &&
                  in_band(c.lowpass_min_hz) && in_band(c.lowpass_max_hz) && c.lowpass_min_hz < c.lowpass_max_hz &&
                  in_band(c.bandpass_low_min_hz) && in_band(c.bandpass_low_max_hz) &&
                  c.bandpass_low_min_hz < c.bandpass_low_max_hz && in_band(c.bandpass_high_min_hz) &&
                  in_band(c.bandpass_high_max_hz) && c.bandpass_high_min_hz < c.bandpass_high_max_hz &&
                  c.bandpass_low_max_hz < c.bandpass_high_min_hz;
  if (!ok) fail(Errc::kInvalidArgument, "bleed config: degenerate or out-of-band range");
}

AudioBuffer render_bleed(const AudioBuffer& clean_source, const CorruptionRecord& record) {
  return apply_filter(apply_gain_db(clean_source, record.gain_db), design_filter(record.filter));
}

Song bleed_song(const Song& clean, const BleedConfig& config, std::uint64_t song_seed, CorruptionLog& log) {
  validate(config);
  clean.stems.require_aligned("bleed_song(" + clean.id + ")");
  Rng rng(song_seed);
  Song out;
  out.id = clean.id;
  out.stems = clean.stems;
  for (SourceClass dst : kAllClasses) {
    for (SourceClass src : kAllClasses) {
      if (src == dst) continue;
      CorruptionRecord r;
      r.kind = CorruptionKind::kBleed;
      r.song_id = clean.id;
      r.stem = std::string(to_string(dst));
      r.source = src;
      r.destination = dst;
      r.gain_db = rng.uniform_closed(config.gain_db_min, config.gain_db_max);
      r.filter.kind = rng.coin() ? FilterKind::kBandpass : FilterKind::kLowpass;
      r.filter.order = static_cast<int>(rng.uniform_int(config.order_min, config.order_max));
      if (r.filter.kind == FilterKind::kLowpass) {
        r.filter.cutoff_low_hz = 0.0;
        r.filter.cutoff_high_hz = rng.uniform(config.lowpass_min_hz, config.lowpass_max_hz);
      } else {
        r.filter.cutoff_low_hz = rng.uniform_closed(config.bandpass_low_min_hz, config.bandpass_low_max_hz);
        r.filter.cutoff_high_hz = rng.uniform_closed(config.bandpass_high_min_hz, config.bandpass_high_max_hz);
      }
      out.stems[dst] += render_bleed(clean.stems[src], r);
      log.push_back(std::move(r));
    }
  }
  return out;
}

BleedResult corrupt_bleeding(std::span<const Song> songs, const BleedConfig& config) {
  BleedResult result;
  for (std::size_t s = 0; s < songs.size(); ++s) {
    Song corrupted = bleed_song(songs[s], config, derive_seed(config.seed, s), result.log);
    Song against_original = corrupted;
    against_original.mixture = songs[s].mix();
    result.original_mixture.push_back(check_mixture_consistency(against_original, kConsistencyTolerance));
    result.songs.push_back(std::move(corrupted));
  }
  return result;
}

DatasetOutput corrupt_bleeding(const Manifest& clean, const BleedConfig& config, const fs::path& out_dir,
                               int jobs) {
  validate(config);
  const std::size_t n = clean.songs.size();
  std::vector<CorruptionLog> logs(n);
  std::vector<ManifestSong> entries(n);
  parallel_for(n, jobs, [&](std::size_t s) {
    const Song song = load_song(clean, s);
    Song corrupted = bleed_song(song, config, derive_seed(config.seed, s), logs[s]);
    ManifestSong entry = write_class_song(corrupted, out_dir);
    corrupted.mixture = song.mix();
    const auto report = check_mixture_consistency(corrupted, kConsistencyTolerance);
    entry.notes["original_mixture"] = {{"consistent", report.consistent}, {"max_error", report.max_error}};
    entries[s] = std::move(entry);
  });

  DatasetOutput out;
  out.manifest.root = out_dir;
  out.manifest.taxonomy = clean.taxonomy;
  out.manifest.songs = std::move(entries);
  out.manifest.provenance.generator = "corrupt/bleeding";
  out.manifest.provenance.seed = config.seed;
  out.manifest.provenance.details = {
      {"gain_db", {config.gain_db_min, config.gain_db_max}},
      {"order", {config.order_min, config.order_max}},
      {"lowpass_hz", {config.lowpass_min_hz, config.lowpass_max_hz}},
      {"bandpass_low_hz", {config.bandpass_low_min_hz, config.bandpass_low_max_hz}},
      {"bandpass_high_hz", {config.bandpass_high_min_hz, config.bandpass_high_max_hz}},
  };
  for (auto& l : logs) out.log.insert(out.log.end(), l.begin(), l.end());
  return out;
}

}  // namespace sdx
