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

#include "cli.hpp"
#include "sdx/corruptor.hpp"
#include "sdx/error.hpp"
#include "sdx/rating.hpp"
#include "sdx/synth.hpp"
#include "sdx/wav.hpp"

namespace sdx::cli {
namespace {

struct SynthArgs {
  std::size_t songs = 10;
  double seconds = 1.0;
  int partials = 3;
  bool modulate = false;
};

struct CorruptArgs {
  std::string kind = "label-noise";
  double rate = 0.2;
  fs::path confusion;
  double gain_min_db = -12.0;
  double gain_max_db = -7.0;
};

struct SegmentArgs {
  fs::path input;
  std::size_t count = 4;
  double seconds = kDefaultSegmentSeconds;
  double min_gap = 0.0;
};

void require_out(const Common& c) {
  if (c.out.empty()) fail(Errc::kInvalidArgument, "--out is required");
}

nlohmann::json segments_json(const std::vector<Segment>& segs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : segs) {
    out.push_back({{"start", s.start},
                   {"end", s.end},
                   {"start_seconds", static_cast<double>(s.start) / kSampleRate},
                   {"end_seconds", static_cast<double>(s.end) / kSampleRate}});
  }
  return out;
}

}  // namespace

void register_data(CLI::App& app, Common& common, Actions& actions) {
  static SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic multitrack corpus");
  add_common(*s, common);
  s->add_option("--songs", synth.songs, "Number of songs")->capture_default_str();
  s->add_option("--seconds", synth.seconds, "Song duration")->capture_default_str();
  s->add_option("--partials", synth.partials, "Sinusoids per stem")->capture_default_str();
  s->add_flag("--modulate", synth.modulate, "Apply slow amplitude envelopes");
  actions["synth"] = [&common](CLI::App& sub) {
    require_out(common);
    SynthConfig cfg;
    cfg.seconds = synth.seconds;
    cfg.partials = synth.partials;
    cfg.modulate = synth.modulate;
    const auto songs = synth_corpus(synth.songs, cfg, common.seed);
    Manifest m = write_raw_corpus(songs, common.out, "synth");
    m.provenance.seed = common.seed;
    save_manifest(m, common.out / "manifest.json");
    write_provenance(common.out, sub, common.seed);
    print_json({{"songs", songs.size()}, {"manifest", (common.out / "manifest.json").string()}});
  };

  static CorruptArgs corrupt;
  auto* c = app.add_subcommand("corrupt", "Inject label noise or bleeding into a dataset");
  add_common(*c, common);
  c->add_option("--kind", corrupt.kind, "label-noise or bleeding")
      ->capture_default_str()
      ->check(CLI::IsMember({"label-noise", "bleeding"}));
  c->add_option("--rate", corrupt.rate, "Relabeling probability per stem")->capture_default_str();
  c->add_option("--confusion", corrupt.confusion, "Confusion matrix JSON (default: shipped matrix)");
  c->add_option("--gain-min", corrupt.gain_min_db, "Lowest bleed gain in dB")->capture_default_str();
  c->add_option("--gain-max", corrupt.gain_max_db, "Highest bleed gain in dB")->capture_default_str();
  actions["corrupt"] = [&common](CLI::App& sub) {
    require_out(common);
    const Manifest clean = require_manifest(common.manifest);
    DatasetOutput out;
    nlohmann::json summary;
    if (corrupt.kind == "label-noise") {
      LabelNoiseConfig cfg;
      cfg.rate = corrupt.rate;
      cfg.seed = common.seed;
      if (!corrupt.confusion.empty()) {
        cfg.confusion = ConfusionMatrix::from_json(nlohmann::json::parse(read_text_file(corrupt.confusion)));
      }
      out = corrupt_label_noise(clean, cfg, common.out, common.jobs);
      summary["effective_fraction"] = effective_corruption_fraction(out.log, clean);
    } else {
      BleedConfig cfg;
      cfg.gain_db_min = corrupt.gain_min_db;
      cfg.gain_db_max = corrupt.gain_max_db;
      cfg.seed = common.seed;
      out = corrupt_bleeding(clean, cfg, common.out, common.jobs);
    }
    out.manifest.provenance.parent_manifest = common.manifest.filename().string();
    save_manifest(out.manifest, common.out / "manifest.json");
    write_text_file(common.out / "corruption_log.jsonl", to_jsonl(out.log));
    write_provenance(common.out, sub, common.seed);
    summary["songs"] = out.manifest.songs.size();
    summary["records"] = out.log.size();
    print_json(summary);
  };

  static SegmentArgs seg;
  auto* g = app.add_subcommand("segments", "Pick high-energy segments for listening tests");
  add_common(*g, common);
  g->add_option("--input", seg.input, "WAV file (instead of --manifest)");
  g->add_option("-n,--count", seg.count, "Segments per song")->capture_default_str();
  g->add_option("--segment-seconds", seg.seconds, "Segment duration")->capture_default_str();
  g->add_option("--min-gap", seg.min_gap, "Minimum gap between segments in seconds")->capture_default_str();
  actions["segments"] = [&common](CLI::App&) {
    nlohmann::json result = nlohmann::json::object();
    if (!seg.input.empty()) {
      result[seg.input.filename().string()] =
          segments_json(select_segments(load_wav(seg.input), seg.count, seg.seconds, seg.min_gap));
    } else {
      const Manifest m = require_manifest(common.manifest);
      for (std::size_t i = 0; i < m.songs.size(); ++i) {
        const Song song = load_song(m, i);
        result[song.id] = segments_json(select_segments(song.mix(), seg.count, seg.seconds, seg.min_gap));
      }
    }
    if (!common.out.empty()) write_text_file(common.out, dump_json(result));
    print_json(result);
  };
}

}  // namespace sdx::cli
