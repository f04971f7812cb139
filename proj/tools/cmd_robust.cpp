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

#include <optional>

#include "cli.hpp"
#include "sdx/error.hpp"
#include "sdx/rng.hpp"
#include "sdx/robust.hpp"
#include "sdx/toy_model.hpp"

namespace sdx::cli {
namespace {

struct RefineArgs {
  std::string method = "redistributed";
  int iterations = 2;
  std::string trainer = "oracle";
  fs::path reference;
  int steps = 300;
};

struct CleanArgs {
  fs::path reference;
  std::string separator = "oracle";
  double threshold_db = kCleanThresholdDb;
};

struct ToyArgs {
  std::size_t songs = 40;
  std::size_t validation_songs = 10;
  double corrupt_rate = 0.3;
  std::optional<double> quantile;
  std::string axis = "batch";
  int warmup = 0;
  int steps = 300;
  std::size_t batch = 8;
  double learning_rate = 0.2;
};

std::vector<Song> reference_songs(const fs::path& path, std::span<const Song> dataset) {
  if (path.empty()) fail(Errc::kInvalidArgument, "--reference (clean manifest) is required for the oracle");
  const Manifest ref = load_manifest(path);
  std::vector<Song> out;
  for (const Song& s : dataset) out.push_back(load_song(ref, ref.find_song(s.id)));
  return out;
}

}  // namespace

void register_robust(CLI::App& app, Common& common, Actions& actions) {
  static RefineArgs rf;
  auto* r = app.add_subcommand("refine", "Iterative dataset refinement");
  add_common(*r, common);
  r->add_option("--method", rf.method, "filtered or redistributed")
      ->capture_default_str()
      ->check(CLI::IsMember({"filtered", "redistributed"}));
  r->add_option("--iterations", rf.iterations, "Refinement rounds N")->capture_default_str();
  r->add_option("--trainer", rf.trainer, "oracle (clean-stem IRM) or toy (mask model)")
      ->capture_default_str()
      ->check(CLI::IsMember({"oracle", "toy"}));
  r->add_option("--reference", rf.reference, "Clean manifest for the oracle trainer");
  r->add_option("--steps", rf.steps, "Toy trainer steps per round")->capture_default_str();
  actions["refine"] = [&common](CLI::App& sub) {
    if (common.out.empty()) fail(Errc::kInvalidArgument, "--out is required");
    const Manifest m = require_manifest(common.manifest);
    std::vector<Song> dataset = load_songs(m);
    RefinementHooks hooks;
    if (rf.trainer == "oracle") {
      const auto clean = std::make_shared<std::vector<Song>>(reference_songs(rf.reference, dataset));
      hooks.train = [clean](std::span<const Song>, int) { return oracle_for(*clean); };
    } else {
      hooks.train = [&common](std::span<const Song> d, int i) {
        ToyTrainConfig cfg;
        cfg.steps = rf.steps;
        cfg.seed = derive_seed(common.seed, static_cast<std::uint64_t>(i));
        auto result = train_toy_mask_model(d, {}, cfg);
        return same_separator(std::make_shared<ToyMaskModel>(std::move(result.model)));
      };
    }
    hooks.store = [&common](std::span<const Song> d, int i) -> std::string {
      if (i == 0) return common.manifest.string();
      const fs::path dir = common.out / ("iteration-" + std::to_string(i));
      Manifest out;
      out.root = dir;
      out.provenance.generator = "refine/" + rf.method;
      out.provenance.seed = common.seed;
      out.provenance.details = {{"iteration", i}};
      for (const Song& s : d) out.songs.push_back(write_class_song(s, dir));
      save_manifest(out, dir / "manifest.json");
      return (dir / "manifest.json").string();
    };
    const auto state = iterate_refinement(std::move(dataset), rf.iterations, parse_refine_method(rf.method), hooks,
                                          common.jobs);
    nlohmann::json history = nlohmann::json::array();
    for (const auto& step : state.history) {
      history.push_back({{"iteration", step.iteration}, {"dataset", step.dataset_ref}, {"metrics", step.metrics}});
    }
    const nlohmann::json doc = {{"method", rf.method}, {"iterations", state.iteration}, {"history", history}};
    write_text_file(common.out / "history.json", dump_json(doc));
    write_provenance(common.out, sub, common.seed);
    print_json(doc);
  };

  static CleanArgs cl;
  auto* c = app.add_subcommand("clean", "Energy-based stem cleaning");
  add_common(*c, common);
  c->add_option("--reference", cl.reference, "Clean manifest for the oracle separator");
  c->add_option("--separator", cl.separator, "oracle or a separator spec")->capture_default_str();
  c->add_option("--threshold-db", cl.threshold_db, "Required margin over every other estimate")
      ->capture_default_str();
  actions["clean"] = [&common](CLI::App& sub) {
    const Manifest m = require_manifest(common.manifest);
    const std::vector<Song> songs = load_songs(m);
    SeparatorForSong sep;
    if (cl.separator == "oracle") {
      sep = oracle_for(reference_songs(cl.reference, songs));
    } else {
      sep = same_separator(make_separator(cl.separator, nullptr, common.out.empty() ? fs::path(".") : common.out));
    }
    const auto decisions = energy_clean(songs, sep, cl.threshold_db, common.jobs);
    nlohmann::json list = nlohmann::json::array();
    std::size_t kept = 0;
    for (const auto& d : decisions) {
      list.push_back(to_json(d));
      kept += d.clean ? 1 : 0;
    }
    const nlohmann::json doc = {{"threshold_db", cl.threshold_db},
                                {"stems", decisions.size()},
                                {"clean", kept},
                                {"excluded_fraction", decisions.empty() ? 0.0 : 1.0 - double(kept) / double(decisions.size())},
                                {"decisions", list}};
    if (!common.out.empty()) {
      fs::create_directories(common.out);
      write_text_file(common.out / "decisions.json", dump_json(doc));
      write_provenance(common.out, sub, common.seed);
    }
    print_json({{"stems", decisions.size()}, {"clean", kept}, {"excluded_fraction", doc["excluded_fraction"]}});
  };

  static ToyArgs toy;
  auto* t = app.add_subcommand("toy-train", "Train the toy mask model on synthetic corrupted data");
  add_common(*t, common);
  t->add_option("--songs", toy.songs, "Training songs")->capture_default_str();
  t->add_option("--validation-songs", toy.validation_songs, "Clean validation songs")->capture_default_str();
  t->add_option("--corrupt-rate", toy.corrupt_rate, "Fraction of songs with swapped stems")->capture_default_str();
  t->add_option("--quantile", toy.quantile, "Loss truncation quantile (omit to disable)");
  t->add_option("--axis", toy.axis, "batch, time or both")
      ->capture_default_str()
      ->check(CLI::IsMember({"batch", "time", "both"}));
  t->add_option("--warmup", toy.warmup, "Steps before truncation starts")->capture_default_str();
  t->add_option("--steps", toy.steps, "Gradient steps")->capture_default_str();
  t->add_option("--batch", toy.batch, "Songs per step")->capture_default_str();
  t->add_option("--lr", toy.learning_rate, "Learning rate")->capture_default_str();
  actions["toy-train"] = [&common](CLI::App& sub) {
    if (common.out.empty()) fail(Errc::kInvalidArgument, "--out is required");
    ToyCorpusConfig train_cfg;
    train_cfg.songs = toy.songs;
    train_cfg.corrupt_rate = toy.corrupt_rate;
    ToyCorpusConfig val_cfg;
    val_cfg.songs = toy.validation_songs;
    const auto train = make_toy_corpus(train_cfg, derive_seed(common.seed, 0));
    const auto validation = make_toy_corpus(val_cfg, derive_seed(common.seed, 1));
    ToyTrainConfig cfg;
    cfg.steps = toy.steps;
    cfg.batch = toy.batch;
    cfg.learning_rate = toy.learning_rate;
    cfg.seed = common.seed;
    if (toy.quantile) cfg.truncation = TruncationPolicy{*toy.quantile, parse_truncation_axis(toy.axis), toy.warmup};
    const auto result = train_toy_mask_model(train.songs, validation.clean, cfg);
    fs::create_directories(common.out);
    write_text_file(common.out / "curves.json", dump_json(result.curves()));
    write_text_file(common.out / "model.json", dump_json(result.model.to_json()));
    write_provenance(common.out, sub, common.seed);
    print_json({{"final_train_loss", result.train_loss.empty() ? 0.0 : result.train_loss.back()},
                {"final_validation_loss", result.validation_loss.back()},
                {"steps", cfg.steps}});
  };
}

}  // namespace sdx::cli
