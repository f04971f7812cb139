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

#include <csignal>
#include <iostream>

#include "cli.hpp"
#include "sdx/error.hpp"
#include "sdx/listen.hpp"
#include "sdx/listen_http.hpp"
#include "sdx/rating.hpp"

namespace sdx::cli {
namespace {

struct RateArgs {
  fs::path log;
  std::vector<std::string> models;
  TrueSkillParams params;
};

struct StatsArgs {
  fs::path log;
  fs::path sessions;
};

struct StimuliArgs {
  std::vector<std::string> models;  // name=estimates_dir
  std::size_t segments = 4;
  double segment_seconds = kDefaultSegmentSeconds;
  double min_gap = 0.0;
};

struct ServeArgs {
  fs::path stimuli;
  fs::path state;
  std::string host = "127.0.0.1";
  int port = 8080;
  int per_cell = 3;
  fs::path static_dir;
};

std::vector<ComparisonRecord> read_log(const fs::path& path) {
  if (path.empty()) fail(Errc::kInvalidArgument, "--log is required");
  return parse_comparison_log(read_text_file(path));
}

ListenServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

void register_listen(CLI::App& app, Common& common, Actions& actions) {
  static RateArgs rate;
  auto* r = app.add_subcommand("rate", "TrueSkill standings from a comparison log");
  add_common(*r, common);
  r->add_option("--log", rate.log, "Comparison log (JSONL)");
  r->add_option("--models", rate.models, "Models to include even without matches");
  r->add_option("--mu0", rate.params.mu0, "Initial mean")->capture_default_str();
  r->add_option("--sigma0", rate.params.sigma0, "Initial standard deviation")->capture_default_str();
  r->add_option("--beta", rate.params.beta, "Performance noise")->capture_default_str();
  r->add_option("--tau", rate.params.tau, "Dynamics noise")->capture_default_str();
  r->add_option("--draw-probability", rate.params.draw_probability, "Draw rate defining the draw margin")
      ->capture_default_str();
  actions["rate"] = [&common](CLI::App& sub) {
    const auto records = read_log(rate.log);
    const RatingBook book = replay(records, rate.models, rate.params);
    const auto doc = standings_json(book);
    if (!common.out.empty()) {
      fs::create_directories(common.out);
      write_text_file(common.out / "standings.json", dump_json(doc));
      write_provenance(common.out, sub, common.seed);
    }
    print_json(doc);
  };

  static StatsArgs st;
  auto* s = app.add_subcommand("stats", "Assessor interaction statistics and win matrices");
  add_common(*s, common);
  s->add_option("--log", st.log, "Comparison log (JSONL)");
  s->add_option("--sessions", st.sessions, "sessions.jsonl for assessor categories");
  actions["stats"] = [&common](CLI::App& sub) {
    const auto records = read_log(st.log);
    std::map<std::string, std::string> categories;
    if (!st.sessions.empty()) {
      const std::string text = read_text_file(st.sessions);
      std::size_t pos = 0;
      while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() : nl + 1;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto doc = nlohmann::json::parse(line);
        categories[doc.at("assessor").get<std::string>()] = doc.at("category").get<std::string>();
      }
    }
    const auto doc = to_json(assessor_stats(records, categories));
    if (!common.out.empty()) {
      fs::create_directories(common.out);
      write_text_file(common.out / "stats.json", dump_json(doc));
      write_provenance(common.out, sub, common.seed);
    }
    print_json(doc);
  };

  static StimuliArgs sm;
  auto* p = app.add_subcommand("stimuli", "Render listening-test clips from model estimates");
  add_common(*p, common);
  p->add_option("--model", sm.models, "name=estimates_dir, one per model");
  p->add_option("--segments", sm.segments, "Segments per song")->capture_default_str();
  p->add_option("--segment-seconds", sm.segment_seconds, "Segment duration")->capture_default_str();
  p->add_option("--min-gap", sm.min_gap, "Minimum gap between segments in seconds")->capture_default_str();
  actions["stimuli"] = [&common](CLI::App& sub) {
    if (common.out.empty()) fail(Errc::kInvalidArgument, "--out is required");
    const Manifest m = require_manifest(common.manifest);
    std::vector<ModelEstimates> models;
    for (const auto& spec : sm.models) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0) fail(Errc::kInvalidArgument, "expected name=dir, got '" + spec + "'");
      models.push_back(estimates_from_directory(spec.substr(0, eq), spec.substr(eq + 1)));
    }
    StimulusConfig cfg;
    cfg.segments_per_song = sm.segments;
    cfg.segment_seconds = sm.segment_seconds;
    cfg.min_gap_seconds = sm.min_gap;
    cfg.seed = common.seed;
    const auto store = prepare_stimuli(models, load_songs(m), cfg, common.out);
    write_provenance(common.out, sub, common.seed);
    print_json({{"slots", store.slots.size()}, {"stimuli", store.stimuli.size()}});
  };

  static ServeArgs sv;
  auto* v = app.add_subcommand("serve", "Run the listening-test HTTP service");
  add_common(*v, common);
  v->add_option("--stimuli", sv.stimuli, "Directory written by `sdx stimuli`");
  v->add_option("--state", sv.state, "Directory for sessions.jsonl and comparisons.jsonl");
  v->add_option("--host", sv.host, "Bind address")->capture_default_str();
  v->add_option("--port", sv.port, "Port (0: any free port)")->capture_default_str();
  v->add_option("--per-cell", sv.per_cell, "Comparisons per pair, class and stimulus kind")->capture_default_str();
  v->add_option("--static", sv.static_dir, "Directory served at / (the browser client)");
  actions["serve"] = [&common](CLI::App&) {
    if (sv.stimuli.empty() || sv.state.empty()) fail(Errc::kInvalidArgument, "--stimuli and --state are required");
    ServiceConfig cfg;
    cfg.state_dir = sv.state;
    cfg.seed = common.seed;
    cfg.per_cell = sv.per_cell;
    ListeningTest service(StimulusStore::load(sv.stimuli), cfg);
    std::optional<fs::path> static_dir;
    if (!sv.static_dir.empty()) static_dir = sv.static_dir;
    ListenServer server(service, static_dir);
    const int port = server.bind(sv.host, sv.port);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << nlohmann::json{{"listening", sv.host}, {"port", port}}.dump() << std::endl;
    server.listen();
    g_server = nullptr;
  };
}

}  // namespace sdx::cli
