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

#include <cmath>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "sdx/error.hpp"
#include "sdx/evaluator.hpp"
#include "sdx/parallel.hpp"
#include "sdx/rating.hpp"
#include "sdx/rng.hpp"

namespace sdx::cli {
namespace {

struct EvaluateArgs {
  fs::path estimates;
  std::string phase = "all";
  std::string policy = "saturate";
  double saturation_db = 100.0;
  std::string submission;
  fs::path leaderboard;
};

struct SeparateArgs {
  std::string separator = "oracle";
  int shifts = 1;
  std::size_t max_shift = 22050;
  double overlap = 0.0;
  std::size_t window = 0;
  bool phase_invert = false;
};

struct ReportArgs {
  std::vector<std::string> evals;  // name=path
  fs::path log;
  double bin_width = 1.0;
};

std::pair<std::string, fs::path> split_named(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) fail(Errc::kInvalidArgument, "expected name=path, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

nlohmann::json read_json(const fs::path& path) {
  auto doc = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded()) fail(Errc::kSchemaError, path.string() + ": not JSON");
  return doc;
}

Leaderboard load_leaderboard(const fs::path& path, Phase phase) {
  Leaderboard board(phase);
  if (path.empty() || !fs::exists(path)) return board;
  const auto doc = read_json(path);
  try {
    for (const auto& row : doc.at("rows")) {
      board.insert({row.at("id").get<std::string>(), report_from_json(row.at("sdr"))});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kSchemaError, path.string() + ": " + e.what());
  }
  return board;
}

// Agreement between listener choices and SDR ordering, binned by |SDR gap|.
struct AgreementBin {
  double low = 0.0;
  double high = 0.0;
  int agree = 0;
  int total = 0;
};

std::string agreement_svg(const std::vector<AgreementBin>& bins) {
  const double w = 480, h = 320, left = 60, right = 20, top = 20, bottom = 50;
  const double max_x = bins.empty() ? 1.0 : bins.back().high;
  auto px = [&](double x) { return left + (w - left - right) * x / max_x; };
  auto py = [&](double y) { return top + (h - top - bottom) * (1.0 - y); };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << w - right << "\" y2=\"" << py(0)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << left << "\" y2=\"" << py(1)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << py(0.5) << "\" x2=\"" << w - right << "\" y2=\"" << py(0.5)
      << "\" stroke=\"#999\" stroke-dasharray=\"4 4\"/>\n";
  svg << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\" font-size=\"12\">|SDR gap| (dB)</text>\n";
  svg << "<text x=\"16\" y=\"" << h / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 " << h / 2
      << ")\" text-anchor=\"middle\">agreement</text>\n";
  for (double y : {0.0, 0.5, 1.0}) {
    svg << "<text x=\"" << left - 6 << "\" y=\"" << py(y) + 4 << "\" font-size=\"10\" text-anchor=\"end\">" << y
        << "</text>\n";
  }
  std::string points;
  for (const auto& b : bins) {
    if (b.total == 0) continue;
    const double x = px(0.5 * (b.low + b.high));
    const double y = py(static_cast<double>(b.agree) / b.total);
    svg << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    points += std::to_string(x) + "," + std::to_string(y) + " ";
  }
  svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" points=\"" << points << "\"/>\n</svg>\n";
  return svg.str();
}

}  // namespace

void register_eval(CLI::App& app, Common& common, Actions& actions) {
  static EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score estimates against a reference dataset");
  add_common(*e, common);
  e->add_option("--estimates", ev.estimates, "Directory of <song>/<class>.wav estimates");
  e->add_option("--phase", ev.phase, "all, phase1, phase2 or final")->capture_default_str();
  e->add_option("--policy", ev.policy, "saturate or skip infinite SDRs")
      ->capture_default_str()
      ->check(CLI::IsMember({"saturate", "skip"}));
  e->add_option("--saturation-db", ev.saturation_db, "Value used for +inf under saturate")->capture_default_str();
  e->add_option("--submission", ev.submission, "Submission name for the leaderboard");
  e->add_option("--leaderboard", ev.leaderboard, "Leaderboard JSON to update");
  actions["evaluate"] = [&common](CLI::App& sub) {
    const Manifest reference = require_manifest(common.manifest);
    if (ev.estimates.empty()) fail(Errc::kInvalidArgument, "--estimates is required");
    EvalPolicy policy;
    policy.infinity = ev.policy == "saturate" ? InfinityPolicy::kSaturate : InfinityPolicy::kSkip;
    policy.saturation_db = ev.saturation_db;
    const Phase phase = parse_phase(ev.phase);
    std::vector<std::string> ids;
    if (phase != Phase::kAll) {
      std::vector<std::string> all;
      for (const auto& s : reference.songs) all.push_back(s.id);
      ids = phase_subset(all, phase, common.seed);
    }
    const EvaluationResult result = evaluate_directory(reference, ev.estimates, policy, common.jobs, ids);
    nlohmann::json doc = result.to_json();
    doc["phase"] = std::string(to_string(phase));
    if (!common.out.empty()) {
      fs::create_directories(common.out);
      write_text_file(common.out / "evaluation.json", dump_json(doc));
      write_provenance(common.out, sub, common.seed);
    }
    if (!ev.leaderboard.empty()) {
      if (ev.submission.empty()) fail(Errc::kInvalidArgument, "--leaderboard needs --submission");
      Leaderboard board = load_leaderboard(ev.leaderboard, phase);
      board.insert({ev.submission, result.overall});
      write_text_file(ev.leaderboard, dump_json(board.to_json()));
      fs::path table = ev.leaderboard;
      table.replace_extension(".txt");
      write_text_file(table, board.table());
    }
    print_json(doc["overall"]);
  };

  static SeparateArgs sep;
  auto* s = app.add_subcommand("separate", "Run a separator over a dataset");
  add_common(*s, common);
  s->add_option("--separator", sep.separator, "oracle, passthrough:<class>, external:<cmd>, toy:<model.json>")
      ->capture_default_str();
  s->add_option("--shifts", sep.shifts, "Random time shifts averaged at inference")->capture_default_str();
  s->add_option("--max-shift", sep.max_shift, "Largest shift in samples")->capture_default_str();
  s->add_option("--overlap", sep.overlap, "Window overlap ratio in [0, 1)")->capture_default_str();
  s->add_option("--window", sep.window, "Window length in samples (0: whole song)")->capture_default_str();
  s->add_flag("--phase-invert", sep.phase_invert, "Average with the sign-flipped input");
  actions["separate"] = [&common](CLI::App& sub) {
    const Manifest m = require_manifest(common.manifest);
    if (common.out.empty()) fail(Errc::kInvalidArgument, "--out is required");
    InferenceAugmentation aug;
    aug.n_shifts = sep.shifts;
    aug.max_shift = sep.max_shift;
    aug.overlap_ratio = sep.overlap;
    aug.window_len = sep.window;
    aug.phase_invert = sep.phase_invert;
    validate(aug);
    fs::create_directories(common.out);
    const bool per_song = sep.separator == "oracle";
    SeparatorPtr shared;
    if (!per_song) shared = make_separator(sep.separator, nullptr, common.out / ".work");
    const int jobs = shared && !shared->concurrent() ? 1 : common.jobs;
    parallel_for(m.songs.size(), jobs, [&](std::size_t i) {
      const Song song = load_song(m, i);
      const SeparatorPtr model = per_song ? make_separator("oracle", &song.stems, {}) : shared;
      const Stems est = infer_augmented(*model, song.mix(), aug, derive_seed(common.seed, i), 1);
      save_estimates(est, common.out / song.id);
    });
    write_provenance(common.out, sub, common.seed);
    print_json({{"songs", m.songs.size()}, {"estimates", common.out.string()}});
  };

  static ReportArgs rep;
  auto* r = app.add_subcommand("report", "Leaderboard tables and SDR/preference agreement");
  add_common(*r, common);
  r->add_option("--eval", rep.evals, "name=evaluation.json, one per model")->expected(1, -1);
  r->add_option("--log", rep.log, "Listening-test comparison log (JSONL)");
  r->add_option("--bin-width", rep.bin_width, "Agreement bin width in dB")->capture_default_str();
  actions["report"] = [&common](CLI::App& sub) {
    if (common.out.empty()) fail(Errc::kInvalidArgument, "--out is required");
    if (rep.evals.empty()) fail(Errc::kInvalidArgument, "at least one --eval is required");
    if (!(rep.bin_width > 0.0)) fail(Errc::kInvalidArgument, "--bin-width must be positive");
    fs::create_directories(common.out);
    Leaderboard board;
    // model -> song -> per-class SDR
    std::map<std::string, std::map<std::string, SdrReport>> scores;
    for (const auto& spec : rep.evals) {
      const auto [name, path] = split_named(spec);
      const auto doc = read_json(path);
      board.insert({name, report_from_json(doc.at("overall"))});
      for (const auto& song : doc.at("songs")) {
        scores[name][song.at("song_id").get<std::string>()] = report_from_json(song.at("sdr"));
      }
    }
    write_text_file(common.out / "leaderboard.txt", board.table());
    write_text_file(common.out / "leaderboard.json", dump_json(board.to_json()));
    nlohmann::json summary = {{"leaderboard", board.to_json()}};

    if (!rep.log.empty()) {
      const auto records = parse_comparison_log(read_text_file(rep.log));
      std::vector<AgreementBin> bins;
      int used = 0;
      for (const auto& rec : records) {
        const auto a = scores.find(rec.model_a);
        const auto b = scores.find(rec.model_b);
        if (a == scores.end() || b == scores.end()) continue;
        const auto sa = a->second.find(rec.song);
        const auto sb = b->second.find(rec.song);
        if (sa == a->second.end() || sb == b->second.end()) continue;
        const auto va = sa->second[rec.source];
        const auto vb = sb->second[rec.source];
        if (!va || !vb || !std::isfinite(*va) || !std::isfinite(*vb) || *va == *vb) continue;
        const double gap = std::abs(*va - *vb);
        const auto k = static_cast<std::size_t>(gap / rep.bin_width);
        while (bins.size() <= k) {
          const double lo = static_cast<double>(bins.size()) * rep.bin_width;
          bins.push_back({lo, lo + rep.bin_width, 0, 0});
        }
        const bool sdr_prefers_a = *va > *vb;
        bins[k].agree += (rec.choice == Choice::kA) == sdr_prefers_a ? 1 : 0;
        ++bins[k].total;
        ++used;
      }
      std::string csv = "sdr_gap_low_db,sdr_gap_high_db,agreement,count\n";
      for (const auto& bin : bins) {
        if (bin.total == 0) continue;
        char line[128];
        std::snprintf(line, sizeof line, "%.3f,%.3f,%.6f,%d\n", bin.low, bin.high,
                      static_cast<double>(bin.agree) / bin.total, bin.total);
        csv += line;
      }
      write_text_file(common.out / "agreement.csv", csv);
      write_text_file(common.out / "agreement.svg", agreement_svg(bins));
      summary["agreement_comparisons"] = used;
    }
    write_provenance(common.out, sub, common.seed);
    print_json(summary);
  };
}

}  // namespace sdx::cli
