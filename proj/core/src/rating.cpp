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

#include "sdx/rating.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "sdx/error.hpp"
#include "sdx/rng.hpp"

namespace sdx {

std::string_view to_string(StimulusKind kind) {
  return kind == StimulusKind::kExtraction ? "extraction" : "residual";
}

StimulusKind parse_stimulus_kind(std::string_view text) {
  if (text == "extraction") return StimulusKind::kExtraction;
  if (text == "residual") return StimulusKind::kResidual;
  fail(Errc::kInvalidArgument, "unknown stimulus kind '" + std::string(text) + "'");
}

std::string_view to_string(Choice choice) { return choice == Choice::kA ? "a" : "b"; }

Choice parse_choice(std::string_view text) {
  if (text == "a" || text == "A") return Choice::kA;
  if (text == "b" || text == "B") return Choice::kB;
  fail(Errc::kInvalidArgument, "choice must be 'a' or 'b', got '" + std::string(text) + "'");
}

void validate(const ComparisonRecord& r) {
  if (r.model_a.empty() || r.model_b.empty()) fail(Errc::kInvalidArgument, "comparison without model ids");
  if (r.model_a == r.model_b) fail(Errc::kInvalidArgument, "comparison pairs '" + r.model_a + "' with itself");
  if (!(r.elapsed_seconds >= 0.0) || !std::isfinite(r.elapsed_seconds)) {
    fail(Errc::kInvalidArgument, "elapsed_seconds must be finite and >= 0");
  }
  if (r.switch_count < 0) fail(Errc::kInvalidArgument, "switch_count must be >= 0");
  if (r.segment < 0) fail(Errc::kInvalidArgument, "segment must be >= 0");
}

nlohmann::json to_json(const ComparisonRecord& r) {
  return {{"assessor", r.assessor},
          {"model_a", r.model_a},
          {"model_b", r.model_b},
          {"song", r.song},
          {"segment", r.segment},
          {"source", std::string(to_string(r.source))},
          {"stimulus", std::string(to_string(r.stimulus))},
          {"choice", std::string(to_string(r.choice))},
          {"elapsed_seconds", r.elapsed_seconds},
          {"switch_count", r.switch_count},
          {"timestamp", r.timestamp}};
}

ComparisonRecord comparison_from_json(const nlohmann::json& doc) {
  ComparisonRecord r;
  try {
    r.assessor = doc.at("assessor").get<std::string>();
    r.model_a = doc.at("model_a").get<std::string>();
    r.model_b = doc.at("model_b").get<std::string>();
    r.song = doc.at("song").get<std::string>();
    r.segment = doc.at("segment").get<int>();
    r.source = parse_source_class(doc.at("source").get<std::string>());
    r.stimulus = parse_stimulus_kind(doc.at("stimulus").get<std::string>());
    r.choice = parse_choice(doc.at("choice").get<std::string>());
    r.elapsed_seconds = doc.at("elapsed_seconds").get<double>();
    r.switch_count = doc.at("switch_count").get<int>();
    r.timestamp = doc.value("timestamp", std::string());
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kSchemaError, std::string("comparison record: ") + e.what());
  } catch (const Error& e) {
    fail(Errc::kSchemaError, std::string("comparison record: ") + e.what());
  }
  validate(r);
  return r;
}

std::string to_jsonl(const ComparisonRecord& record) { return to_json(record).dump() + "\n"; }

std::vector<ComparisonRecord> parse_comparison_log(std::string_view text) {
  std::vector<ComparisonRecord> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(comparison_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::kSchemaError, "comparison log line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      fail(Errc::kSchemaError, "comparison log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// --- ratings -------------------------------------------------------------------

void RatingBook::add_model(const std::string& model) { ratings_.try_emplace(model, params_.initial()); }

void RatingBook::apply(const ComparisonRecord& record) {
  validate(record);
  add_model(record.model_a);
  add_model(record.model_b);
  Rating& w = ratings_.at(record.winner());
  Rating& l = ratings_.at(record.loser());
  const auto [nw, nl] = trueskill_update(w, l, false, params_);
  w = nw;
  l = nl;
  ++matches_;
}

RatingBook replay(std::span<const ComparisonRecord> records, std::span<const std::string> models,
                  const TrueSkillParams& params) {
  RatingBook book(params);
  for (const auto& m : models) book.add_model(m);
  for (const auto& r : records) book.apply(r);
  return book;
}

nlohmann::json standings_json(const RatingBook& book) {
  const auto ranking = rank(book.ratings());
  nlohmann::json draws = nlohmann::json::array();
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    for (std::size_t j = i + 1; j < ranking.size(); ++j) {
      draws.push_back({{"a", ranking[i].model},
                       {"b", ranking[j].model},
                       {"draw_probability", draw_probability(ranking[i].rating, ranking[j].rating, book.params())}});
    }
  }
  return {{"matches", book.matches()}, {"ranking", to_json(ranking)}, {"draw_probabilities", draws}};
}

// --- schedule --------------------------------------------------------------------

SchedulePlan schedule_comparisons(std::span<const std::string> models, const ScheduleConfig& config,
                                  std::uint64_t seed) {
  if (models.size() < 2) fail(Errc::kTooFewModels, "a listening test needs at least two models");
  if (std::set<std::string>(models.begin(), models.end()).size() != models.size()) {
    fail(Errc::kInvalidArgument, "duplicate model id in schedule");
  }
  if (config.per_cell < 1) fail(Errc::kInvalidArgument, "per_cell must be at least 1");
  if (config.classes < 1 || config.classes > static_cast<int>(kNumClasses)) {
    fail(Errc::kInvalidArgument, "classes must lie in [1, 4]");
  }
  if (config.stimuli < 1 || config.stimuli > 2) fail(Errc::kInvalidArgument, "stimuli must be 1 or 2");
  if (config.slots < 1) fail(Errc::kInvalidArgument, "schedule needs at least one song/segment slot");

  SchedulePlan plan;
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t j = i + 1; j < models.size(); ++j) {
      for (int c = 0; c < config.classes; ++c) {
        for (int s = 0; s < config.stimuli; ++s) {
          for (int k = 0; k < config.per_cell; ++k) {
            plan.comparisons.push_back({models[i], models[j], kAllClasses[static_cast<std::size_t>(c)],
                                        kAllStimulusKinds[static_cast<std::size_t>(s)], 0});
          }
        }
      }
    }
  }
  Rng rng(seed);
  rng.shuffle(std::span(plan.comparisons));
  for (std::size_t k = 0; k < plan.comparisons.size(); ++k) plan.comparisons[k].slot = k % config.slots;
  return plan;
}

// --- segments ----------------------------------------------------------------------

std::vector<Segment> select_segments(const AudioBuffer& song, std::size_t n, double segment_seconds,
                                     double min_gap_seconds) {
  if (n == 0) return {};
  if (!(segment_seconds > 0.0) || !(min_gap_seconds >= 0.0)) {
    fail(Errc::kInvalidArgument, "segment length must be positive and gap non-negative");
  }
  const auto len = static_cast<std::size_t>(std::llround(segment_seconds * kSampleRate));
  const auto gap = static_cast<std::size_t>(std::llround(min_gap_seconds * kSampleRate));
  const std::size_t total = song.frames();
  if (len == 0 || total < n * len + (n - 1) * gap) {
    fail(Errc::kSongTooShort, "song of " + std::to_string(total) + " samples cannot hold " + std::to_string(n) +
                                  " segments of " + std::to_string(len));
  }

  std::vector<double> prefix(total + 1, 0.0);
  for (std::size_t i = 0; i < total; ++i) {
    const double l = song.channel(0)[i];
    const double r = song.channel(1)[i];
    prefix[i + 1] = prefix[i] + l * l + r * r;
  }
  const std::size_t candidates = total - len + 1;
  std::vector<double> energy(candidates);
  double peak = 0.0;
  for (std::size_t s = 0; s < candidates; ++s) {
    energy[s] = std::max(0.0, prefix[s + len] - prefix[s]);
    peak = std::max(peak, energy[s]);
  }
  // Quantized scores; windows equal up to rounding tie exactly.
  std::vector<std::int64_t> score(candidates, 0);
  if (peak > 0.0) {
    for (std::size_t s = 0; s < candidates; ++s) score[s] = std::llround(energy[s] / peak * 1e9);
  }

  std::vector<std::uint8_t> open(candidates, 1);
  std::vector<Segment> out;
  for (std::size_t k = 0; k < n; ++k) {
    std::optional<std::size_t> best;
    for (std::size_t s = 0; s < candidates; ++s) {
      if (open[s] && (!best || score[s] > score[*best])) best = s;
    }
    if (!best) {
      fail(Errc::kSongTooShort, "only " + std::to_string(out.size()) + " of " + std::to_string(n) +
                                    " segments fit the song");
    }
    const std::size_t s = *best;
    out.push_back({s, s + len});
    // Block every start whose window would come within `gap` of this one.
    const std::size_t reach = len + gap;
    const std::size_t lo = s >= reach - 1 ? s - (reach - 1) : 0;
    const std::size_t hi = std::min(candidates, s + reach);
    std::fill(open.begin() + static_cast<std::ptrdiff_t>(lo), open.begin() + static_cast<std::ptrdiff_t>(hi), 0);
  }
  std::sort(out.begin(), out.end(), [](const Segment& a, const Segment& b) { return a.start < b.start; });
  return out;
}

// --- statistics ----------------------------------------------------------------------

WinMatrix win_matrix(std::span<const ComparisonRecord> records) {
  std::set<std::string> names;
  for (const auto& r : records) {
    names.insert(r.model_a);
    names.insert(r.model_b);
  }
  WinMatrix m;
  m.models.assign(names.begin(), names.end());
  const std::size_t k = m.models.size();
  auto index = [&](const std::string& name) {
    return static_cast<std::size_t>(std::lower_bound(m.models.begin(), m.models.end(), name) - m.models.begin());
  };
  m.wins.assign(k, std::vector<int>(k, 0));
  for (const auto& r : records) ++m.wins[index(r.winner())][index(r.loser())];
  m.row_normalized.assign(k, std::vector<double>(k, 0.0));
  m.pair_normalized.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    const int row = std::accumulate(m.wins[i].begin(), m.wins[i].end(), 0);
    for (std::size_t j = 0; j < k; ++j) {
      if (row > 0) m.row_normalized[i][j] = static_cast<double>(m.wins[i][j]) / row;
      const int pair = m.wins[i][j] + m.wins[j][i];
      if (pair > 0) m.pair_normalized[i][j] = static_cast<double>(m.wins[i][j]) / pair;
    }
  }
  return m;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

}  // namespace

AssessorStats assessor_stats(std::span<const ComparisonRecord> records,
                             const std::map<std::string, std::string>& categories) {
  if (records.empty()) fail(Errc::kEmptyInput, "no comparison records");
  AssessorStats s;
  s.comparisons = records.size();
  std::vector<double> elapsed;
  std::vector<double> switches;
  std::map<std::string, std::vector<ComparisonRecord>> by_category;
  for (const auto& r : records) {
    elapsed.push_back(r.elapsed_seconds);
    switches.push_back(r.switch_count);
    if (auto it = categories.find(r.assessor); it != categories.end()) by_category[it->second].push_back(r);
  }
  std::tie(s.elapsed_mean, s.elapsed_std) = mean_std(elapsed);
  std::tie(s.switches_mean, s.switches_std) = mean_std(switches);
  s.matrices["all"] = win_matrix(records);
  for (const auto& [category, recs] : by_category) s.matrices[category] = win_matrix(recs);
  return s;
}

nlohmann::json to_json(const WinMatrix& m) {
  return {{"models", m.models},
          {"wins", m.wins},
          {"row_normalized", m.row_normalized},
          {"pair_normalized", m.pair_normalized}};
}

nlohmann::json to_json(const AssessorStats& s) {
  nlohmann::json matrices = nlohmann::json::object();
  for (const auto& [category, m] : s.matrices) matrices[category] = to_json(m);
  return {{"comparisons", s.comparisons},
          {"elapsed_seconds", {{"mean", s.elapsed_mean}, {"std", s.elapsed_std}}},
          {"switch_count", {{"mean", s.switches_mean}, {"std", s.switches_std}}},
          {"win_matrices", matrices}};
}

}  // namespace sdx
