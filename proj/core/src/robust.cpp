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

#include "sdx/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>

#include "sdx/error.hpp"
#include "sdx/parallel.hpp"

namespace sdx {
namespace fs = std::filesystem;

SeparatorForSong same_separator(SeparatorPtr sep) {
  return [sep = std::move(sep)](const Song&, std::size_t) { return sep; };
}

SeparatorForSong oracle_for(std::span<const Song> clean, FrameSpec frames) {
  auto oracles = std::make_shared<std::vector<SeparatorPtr>>();
  for (const Song& s : clean) oracles->push_back(oracle_irm(s.stems, frames));
  auto ids = std::make_shared<std::vector<std::string>>();
  for (const Song& s : clean) ids->push_back(s.id);
  return [oracles, ids](const Song& song, std::size_t index) -> SeparatorPtr {
    if (index >= oracles->size() || (*ids)[index] != song.id) {
      fail(Errc::kInvalidArgument, "no clean reference for song '" + song.id + "'");
    }
    return (*oracles)[index];
  };
}

// --- refinement --------------------------------------------------------------

std::string_view to_string(RefineMethod method) {
  return method == RefineMethod::kFiltered ? "filtered" : "redistributed";
}

RefineMethod parse_refine_method(std::string_view text) {
  if (text == "filtered") return RefineMethod::kFiltered;
  if (text == "redistributed") return RefineMethod::kRedistributed;
  fail(Errc::kInvalidArgument, "unknown refinement method '" + std::string(text) + "'");
}

Stems refine_filtered(const Separator& sep, const Stems& stems) {
  stems.require_aligned("refine_filtered");
  Stems out;
  for (SourceClass c : kAllClasses) out[c] = sep.separate(stems[c])[c];
  return out;
}

Stems refine_redistributed(const Separator& sep, const Stems& stems) {
  stems.require_aligned("refine_redistributed");
  Stems out = Stems::silent(stems.frames());
  for (SourceClass k : kAllClasses) {
    const Stems est = sep.separate(stems[k]);
    for (SourceClass c : kAllClasses) out[c] += est[c];
  }
  return out;
}

Stems refine_stems(const Separator& sep, const Stems& stems, RefineMethod method) {
  return method == RefineMethod::kFiltered ? refine_filtered(sep, stems) : refine_redistributed(sep, stems);
}

RefineResult refine_dataset(std::span<const Song> songs, const SeparatorForSong& sep, RefineMethod method,
                            int jobs) {
  std::vector<std::optional<Song>> out(songs.size());
  std::vector<std::optional<SongFailure>> errors(songs.size());
  parallel_for(songs.size(), jobs, [&](std::size_t i) {
    try {
      const SeparatorPtr model = sep(songs[i], i);
      Song refined{songs[i].id, refine_stems(*model, songs[i].stems, method), std::nullopt};
      out[i] = std::move(refined);
    } catch (const std::exception& e) {
      errors[i] = SongFailure{songs[i].id, e.what()};
    }
  });
  RefineResult result;
  for (std::size_t i = 0; i < songs.size(); ++i) {
    if (out[i]) result.songs.push_back(std::move(*out[i]));
    if (errors[i]) result.failures.push_back(std::move(*errors[i]));
  }
  return result;
}

RefineOutput refine_dataset(const Manifest& dataset, const SeparatorForSong& sep, RefineMethod method,
                            const fs::path& out_dir, int jobs) {
  fs::create_directories(out_dir);
  std::vector<std::optional<ManifestSong>> entries(dataset.songs.size());
  std::vector<std::optional<SongFailure>> errors(dataset.songs.size());
  parallel_for(dataset.songs.size(), jobs, [&](std::size_t i) {
    try {
      const Song song = load_song(dataset, i);
      const SeparatorPtr model = sep(song, i);
      const Song refined{song.id, refine_stems(*model, song.stems, method), std::nullopt};
      entries[i] = write_class_song(refined, out_dir);
    } catch (const std::exception& e) {
      errors[i] = SongFailure{dataset.songs[i].id, e.what()};
    }
  });
  RefineOutput result;
  result.manifest.root = out_dir;
  result.manifest.provenance.generator = "refine";
  result.manifest.provenance.parent_manifest = (dataset.root / "manifest.json").string();
  result.manifest.provenance.details = {{"method", std::string(to_string(method))}};
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i]) result.manifest.songs.push_back(std::move(*entries[i]));
    if (errors[i]) result.failures.push_back(std::move(*errors[i]));
  }
  if (!result.failures.empty()) {
    auto& failed = result.manifest.provenance.details["failed_songs"];
    failed = nlohmann::json::array();
    for (const auto& f : result.failures) failed.push_back({{"id", f.song_id}, {"error", f.message}});
  }
  save_manifest(result.manifest, out_dir / "manifest.json");
  return result;
}

RefinementState iterate_refinement(std::vector<Song> dataset, int iterations, RefineMethod method,
                                   const RefinementHooks& hooks, int jobs) {
  if (iterations < 1) fail(Errc::kInvalidArgument, "refinement needs at least one iteration");
  if (!hooks.train) fail(Errc::kInvalidArgument, "refinement needs a trainer");
  RefinementState state;
  state.dataset = std::move(dataset);
  auto record = [&](int i) {
    RefinementStep step;
    step.iteration = i;
    step.dataset_ref = hooks.store ? hooks.store(state.dataset, i) : "D" + std::to_string(i);
    if (hooks.metrics) step.metrics = hooks.metrics(state.dataset, i);
    state.history.push_back(std::move(step));
  };
  record(0);
  for (int i = 0; i < iterations; ++i) {
    state.model = hooks.train(state.dataset, i);
    RefineResult refined = refine_dataset(state.dataset, state.model, method, jobs);
    if (!refined.failures.empty()) {
      const auto& f = refined.failures.front();
      fail(Errc::kProcessFailed, "refinement of song '" + f.song_id + "' failed: " + f.message);
    }
    state.dataset = std::move(refined.songs);
    state.iteration = i + 1;
    record(i + 1);
  }
  return state;
}

// --- truncation ----------------------------------------------------------------

std::string_view to_string(TruncationAxis axis) {
  switch (axis) {
    case TruncationAxis::kBatch:
      return "batch";
    case TruncationAxis::kTime:
      return "time";
    case TruncationAxis::kBoth:
      return "both";
  }
  return "?";
}

TruncationAxis parse_truncation_axis(std::string_view text) {
  if (text == "batch") return TruncationAxis::kBatch;
  if (text == "time") return TruncationAxis::kTime;
  if (text == "both") return TruncationAxis::kBoth;
  fail(Errc::kInvalidArgument, "unknown truncation axis '" + std::string(text) + "'");
}

void validate(const TruncationPolicy& policy) {
  if (!(policy.quantile > 0.0 && policy.quantile <= 1.0)) {
    fail(Errc::kInvalidArgument, "truncation quantile must lie in (0, 1]");
  }
  if (policy.warmup_steps < 0) fail(Errc::kInvalidArgument, "warmup_steps must be >= 0");
}

double nearest_rank(std::span<const double> values, double q) {
  if (values.empty()) fail(Errc::kEmptyInput, "quantile of an empty set");
  std::vector<double> sorted(values.begin(), values.end());
  const auto n = sorted.size();
  // ceil(q*n) with a guard against q*n landing a hair above an integer.
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
  return sorted[rank - 1];
}

std::vector<std::uint8_t> truncate_losses(const LossTable& losses, const TruncationPolicy& policy, int step) {
  validate(policy);
  if (losses.batch == 0 || losses.time == 0) fail(Errc::kEmptyInput, "empty loss table");
  if (losses.values.size() != losses.batch * losses.time) {
    fail(Errc::kInvalidArgument, "loss table holds " + std::to_string(losses.values.size()) + " values for shape " +
                                     std::to_string(losses.batch) + "x" + std::to_string(losses.time));
  }
  for (double v : losses.values) {
    if (std::isnan(v)) fail(Errc::kInvalidArgument, "loss table contains NaN");
  }
  std::vector<std::uint8_t> keep(losses.values.size(), 1);
  if (policy.quantile >= 1.0 || (step >= 0 && step < policy.warmup_steps)) return keep;

  std::vector<std::uint8_t> sample_kept(losses.batch, 1);
  if (policy.axis != TruncationAxis::kTime) {
    std::vector<double> means(losses.batch);
    for (std::size_t b = 0; b < losses.batch; ++b) {
      double sum = 0.0;
      for (std::size_t t = 0; t < losses.time; ++t) sum += losses.at(b, t);
      means[b] = sum / static_cast<double>(losses.time);
    }
    const double threshold = nearest_rank(means, policy.quantile);
    for (std::size_t b = 0; b < losses.batch; ++b) {
      if (means[b] > threshold) {
        sample_kept[b] = 0;
        std::fill_n(keep.begin() + static_cast<std::ptrdiff_t>(b * losses.time), losses.time, 0);
      }
    }
  }
  if (policy.axis != TruncationAxis::kBatch) {
    for (std::size_t b = 0; b < losses.batch; ++b) {
      if (!sample_kept[b]) continue;
      const std::span<const double> row(losses.values.data() + b * losses.time, losses.time);
      const double threshold = nearest_rank(row, policy.quantile);
      for (std::size_t t = 0; t < losses.time; ++t) {
        if (row[t] > threshold) keep[b * losses.time + t] = 0;
      }
    }
  }
  return keep;
}

// --- energy cleaning -------------------------------------------------------------

nlohmann::json to_json(const CleanDecision& d) {
  nlohmann::json energies = nlohmann::json::object();
  for (SourceClass c : kAllClasses) energies[std::string(to_string(c))] = d.energies[index_of(c)];
  return {{"song", d.song_id},
          {"label", std::string(to_string(d.label))},
          {"clean", d.clean},
          {"margin_db", d.margin_db},
          {"energies", energies}};
}

CleanDecision energy_clean_stem(const Separator& sep, const AudioBuffer& stem, SourceClass label,
                                std::string song_id, double threshold_db) {
  CleanDecision d;
  d.song_id = std::move(song_id);
  d.label = label;
  if (stem.is_silent()) {
    d.clean = true;
    d.margin_db = kMarginSaturationDb;
    return d;
  }
  const Stems est = sep.separate(stem);
  for (SourceClass c : kAllClasses) d.energies[index_of(c)] = est[c].energy();
  const double own = d.energies[index_of(label)];
  double margin = std::numeric_limits<double>::infinity();
  for (SourceClass c : kAllClasses) {
    if (c == label) continue;
    const double other = d.energies[index_of(c)];
    double m = 0.0;
    if (other == 0.0) {
      m = own > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    } else if (own == 0.0) {
      m = -std::numeric_limits<double>::infinity();
    } else {
      m = 10.0 * std::log10(own / other);
    }
    margin = std::min(margin, m);
  }
  d.margin_db = std::clamp(margin, -kMarginSaturationDb, kMarginSaturationDb);
  d.clean = d.margin_db >= threshold_db;
  return d;
}

std::vector<CleanDecision> energy_clean(std::span<const Song> songs, const SeparatorForSong& sep,
                                        double threshold_db, int jobs) {
  std::vector<CleanDecision> out(songs.size() * kNumClasses);
  std::vector<SeparatorPtr> models(songs.size());
  for (std::size_t i = 0; i < songs.size(); ++i) models[i] = sep(songs[i], i);
  parallel_for(out.size(), jobs, [&](std::size_t k) {
    const std::size_t i = k / kNumClasses;
    const SourceClass c = kAllClasses[k % kNumClasses];
    out[k] = energy_clean_stem(*models[i], songs[i].stems[c], c, songs[i].id, threshold_db);
  });
  return out;
}

}  // namespace sdx
