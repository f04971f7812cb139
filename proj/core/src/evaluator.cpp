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

#include "sdx/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sdx/error.hpp"
#include "sdx/parallel.hpp"
#include "sdx/rng.hpp"
#include "sdx/wav.hpp"

namespace sdx {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Running mean; exact when all inputs are equal.
struct RunningMean {
  double value = 0.0;
  std::size_t count = 0;

  void add(double x) {
    ++count;
    value += (x - value) / static_cast<double>(count);
  }
};

// Value as it enters an average under the policy; nullopt if excluded.
std::optional<double> policy_value(double v, const EvalPolicy& policy) {
  if (std::isinf(v) && v > 0) {
    if (policy.infinity == InfinityPolicy::kSkip) return std::nullopt;
    return policy.saturation_db;
  }
  if (policy.infinity == InfinityPolicy::kSaturate) return std::min(v, policy.saturation_db);
  return v;
}

json sdr_value(std::optional<double> v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return *v;
}

std::optional<double> parse_sdr_value(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    fail(Errc::kSchemaError, "bad SDR value '" + s + "'");
  }
  return j.get<double>();
}

std::string format_cell(std::optional<double> v) {
  if (!v) return "-";
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", *v);
  return buf;
}

}  // namespace

double sdr_source(const AudioBuffer& target, const AudioBuffer& estimate) {
  require_same_length(target, estimate, "sdr_source");
  double signal = 0.0;
  double error = 0.0;
  for (int c = 0; c < kChannels; ++c) {
    const auto s = target.channel(c);
    const auto e = estimate.channel(c);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double d = s[i] - e[i];
      signal += s[i] * s[i];
      error += d * d;
    }
  }
  if (signal == 0.0) fail(Errc::kSilentTarget, "sdr_source: target is silent");
  if (error == 0.0) return kInf;
  return 10.0 * std::log10(signal / error);
}

double report_mean(const std::array<std::optional<double>, kNumClasses>& per_source) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : per_source) {
    if (!v) continue;
    sum += *v;
    ++n;
  }
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return sum / static_cast<double>(n);
}

SdrReport sdr_song(const Stems& targets, const Stems& estimates, const EvalPolicy& policy) {
  SdrReport report;
  for (SourceClass c : kAllClasses) {
    if (targets[c].is_silent() && policy.silent_target == SilentTargetPolicy::kSkip) {
      require_same_length(targets[c], estimates[c], "sdr_song");
      continue;
    }
    report.per_source[index_of(c)] = sdr_source(targets[c], estimates[c]);
  }
  report.mean = report_mean(report.per_source);
  return report;
}

SdrReport sdr_dataset(std::span<const SdrReport> reports, const EvalPolicy& policy) {
  if (reports.empty()) fail(Errc::kEmptyInput, "sdr_dataset: no reports");
  std::array<RunningMean, kNumClasses> per_source;
  RunningMean overall;
  for (const auto& r : reports) {
    std::array<std::optional<double>, kNumClasses> adjusted;
    for (std::size_t i = 0; i < kNumClasses; ++i) {
      if (!r.per_source[i]) continue;
      adjusted[i] = policy_value(*r.per_source[i], policy);
      if (adjusted[i]) per_source[i].add(*adjusted[i]);
    }
    const double song_mean = report_mean(adjusted);
    if (!std::isnan(song_mean)) overall.add(song_mean);
  }
  SdrReport out;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (per_source[i].count > 0) out.per_source[i] = per_source[i].value;
  }
  out.mean = overall.count > 0 ? overall.value : std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::vector<double> segment_sdrs(const AudioBuffer& target, const AudioBuffer& estimate, std::size_t segment_len) {
  require_same_length(target, estimate, "segment_sdrs");
  if (segment_len == 0) fail(Errc::kInvalidArgument, "segment_sdrs: zero segment length");
  std::vector<double> out;
  for (std::size_t start = 0; start + segment_len <= target.frames(); start += segment_len) {
    const auto s = target.slice(static_cast<std::ptrdiff_t>(start), segment_len);
    if (s.is_silent()) continue;
    out.push_back(sdr_source(s, estimate.slice(static_cast<std::ptrdiff_t>(start), segment_len)));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) fail(Errc::kEmptyInput, "median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  const double lo = values[n / 2 - 1];
  const double hi = values[n / 2];
  if (lo == hi) return lo;
  return 0.5 * (lo + hi);
}

double sdr_sisec_median(const std::vector<std::vector<double>>& per_song) {
  if (per_song.empty()) fail(Errc::kEmptyInput, "sdr_sisec_median: no songs");
  std::vector<double> song_medians;
  for (const auto& segments : per_song) {
    if (segments.empty()) fail(Errc::kEmptyInput, "sdr_sisec_median: song without segments");
    song_medians.push_back(median(segments));
  }
  return median(std::move(song_medians));
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kPhase1: return "phase1";
    case Phase::kPhase2: return "phase2";
    case Phase::kFinal: return "final";
    case Phase::kAll: return "all";
  }
  return "all";
}

Phase parse_phase(std::string_view name) {
  for (Phase p : {Phase::kPhase1, Phase::kPhase2, Phase::kFinal, Phase::kAll}) {
    if (name == to_string(p)) return p;
  }
  fail(Errc::kInvalidArgument, "unknown phase '" + std::string(name) + "'");
}

std::size_t phase_size(Phase phase) {
  switch (phase) {
    case Phase::kPhase1: return 9;
    case Phase::kPhase2: return 18;
    case Phase::kFinal: return 27;
    case Phase::kAll: return 0;
  }
  return 0;
}

std::vector<std::string> phase_subset(std::span<const std::string> song_ids, Phase phase, std::uint64_t seed) {
  if (phase == Phase::kAll) return {song_ids.begin(), song_ids.end()};
  constexpr std::size_t kChallengeSongs = 27;
  if (song_ids.size() < kChallengeSongs) {
    fail(Errc::kTooFewSongs, "phase subsets need at least 27 songs, got " + std::to_string(song_ids.size()));
  }
  std::vector<std::string> order(song_ids.begin(), song_ids.end());
  std::sort(order.begin(), order.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(order));
  order.resize(phase_size(phase));
  std::vector<std::string> out;
  for (const auto& id : song_ids) {
    if (std::find(order.begin(), order.end(), id) != order.end()) out.push_back(id);
  }
  return out;
}

void Leaderboard::insert(LeaderboardRow row) {
  auto before = [](const LeaderboardRow& a, const LeaderboardRow& b) {
    // NaN means (sorts last)
    const bool an = std::isnan(a.report.mean);
    const bool bn = std::isnan(b.report.mean);
    if (an != bn) return bn;
    if (!an && a.report.mean != b.report.mean) return a.report.mean > b.report.mean;
    return a.id < b.id;
  };
  rows_.insert(std::upper_bound(rows_.begin(), rows_.end(), row, before), std::move(row));
}

std::string Leaderboard::table() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-4s  %-24s %9s %9s %9s %9s %9s\n", "Rank", "Submission", "Mean", "Bass",
                "Drums", "Other", "Vocals");
  out += line;
  int rank = 1;
  for (const auto& row : rows_) {
    const auto& r = row.report;
    std::snprintf(line, sizeof(line), "%-4d  %-24s %9s %9s %9s %9s %9s\n", rank++, row.id.c_str(),
                  format_cell(r.mean).c_str(), format_cell(r[SourceClass::kBass]).c_str(),
                  format_cell(r[SourceClass::kDrums]).c_str(), format_cell(r[SourceClass::kOther]).c_str(),
                  format_cell(r[SourceClass::kVocals]).c_str());
    out += line;
  }
  return out;
}

json Leaderboard::to_json() const {
  json rows = json::array();
  for (const auto& row : rows_) rows.push_back({{"id", row.id}, {"sdr", sdx::to_json(row.report)}});
  return {{"phase", std::string(to_string(phase_))}, {"rows", rows}};
}

json to_json(const SdrReport& report) {
  json j;
  for (SourceClass c : kAllClasses) j[std::string(to_string(c))] = sdr_value(report[c]);
  j["mean"] = std::isnan(report.mean) ? json(nullptr) : sdr_value(report.mean);
  return j;
}

SdrReport report_from_json(const json& doc) {
  SdrReport r;
  for (SourceClass c : kAllClasses) {
    const auto key = std::string(to_string(c));
    if (doc.contains(key)) r.per_source[index_of(c)] = parse_sdr_value(doc.at(key));
  }
  const auto mean = doc.contains("mean") ? parse_sdr_value(doc.at("mean")) : std::nullopt;
  r.mean = mean.value_or(std::numeric_limits<double>::quiet_NaN());
  return r;
}

json EvaluationResult::to_json() const {
  json songs_json = json::array();
  for (const auto& s : songs) songs_json.push_back({{"song_id", s.song_id}, {"sdr", sdx::to_json(s.report)}});
  return {
      {"songs", songs_json},
      {"overall", sdx::to_json(overall)},
      {"policy",
       {{"infinity", policy.infinity == InfinityPolicy::kSaturate ? "saturate" : "skip"},
        {"saturation_db", policy.saturation_db},
        {"silent_target", policy.silent_target == SilentTargetPolicy::kSkip ? "skip" : "error"}}},
  };
}

Stems load_estimates(const fs::path& song_dir) {
  Stems out;
  for (SourceClass c : kAllClasses) {
    const fs::path p = song_dir / (std::string(to_string(c)) + ".wav");
    if (!fs::exists(p)) fail(Errc::kMissingEstimates, "missing estimate " + p.string());
    out[c] = load_wav(p);
  }
  out.require_aligned("estimates in " + song_dir.string());
  return out;
}

void save_estimates(const Stems& stems, const fs::path& song_dir, WavFormat format) {
  for (SourceClass c : kAllClasses) save_wav(stems[c], song_dir / (std::string(to_string(c)) + ".wav"), format);
}

EvaluationResult evaluate_directory(const Manifest& reference, const fs::path& estimates_root,
                                    const EvalPolicy& policy, int jobs, std::span<const std::string> song_ids) {
  std::vector<std::size_t> indices;
  if (song_ids.empty()) {
    for (std::size_t i = 0; i < reference.songs.size(); ++i) indices.push_back(i);
  } else {
    for (const auto& id : song_ids) indices.push_back(reference.find_song(id));
  }
  if (indices.empty()) fail(Errc::kEmptyInput, "evaluate: reference manifest has no songs");

  EvaluationResult result;
  result.policy = policy;
  result.songs.resize(indices.size());
  parallel_for(indices.size(), jobs, [&](std::size_t k) {
    const Song ref = load_song(reference, indices[k]);
    const Stems est = load_estimates(estimates_root / ref.id);
    result.songs[k] = {ref.id, sdr_song(ref.stems, est, policy)};
  });
  std::vector<SdrReport> reports;
  for (const auto& s : result.songs) reports.push_back(s.report);
  result.overall = sdr_dataset(reports, policy);
  return result;
}

}  // namespace sdx
