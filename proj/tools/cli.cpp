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

#include <cstdio>
#include <iostream>

#include "sdx/error.hpp"
#include "sdx/rng.hpp"
#include "sdx/toy_model.hpp"

namespace sdx::cli {

void add_common(CLI::App& sub, Common& common) {
  sub.add_option("--seed", common.seed, "Master random seed")->capture_default_str();
  sub.add_option("--jobs", common.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sub.add_option("--manifest", common.manifest, "Dataset manifest (manifest.json)");
  sub.add_option("--out", common.out, "Output path");
  sub.add_option("--config", common.config, "JSON file with option values");
}

namespace {

std::string option_key(const CLI::Option* opt) {
  const auto& names = opt->get_lnames();
  return names.empty() ? std::string() : names.front();
}

}  // namespace

void apply_config(CLI::App& sub, const fs::path& config) {
  if (config.empty()) return;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(config));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kSchemaError, config.string() + ": " + e.what());
  }
  if (!doc.is_object()) fail(Errc::kSchemaError, config.string() + ": expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    CLI::Option* opt = nullptr;
    for (CLI::Option* o : sub.get_options()) {
      if (option_key(o) == key) opt = o;
    }
    if (!opt || key == "config") fail(Errc::kInvalidArgument, "config key '" + key + "' is not an option of " + sub.get_name());
    if (opt->count() > 0) continue;
    const auto add = [&](const nlohmann::json& v) {
      opt->add_result(v.is_string() ? v.get<std::string>() : v.is_boolean() ? (v.get<bool>() ? "true" : "false") : v.dump());
    };
    if (value.is_array()) {
      for (const auto& v : value) add(v);
    } else {
      add(value);
    }
    opt->run_callback();
  }
}

nlohmann::json effective_options(const CLI::App& sub) {
  nlohmann::json out = nlohmann::json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string key = option_key(opt);
    if (key.empty() || key == "help" || key == "config" || key == "jobs") continue;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      out[key] = results.size() == 1 ? nlohmann::json(results.front()) : nlohmann::json(results);
    } else {
      out[key] = opt->get_default_str();
    }
  }
  return out;
}

void write_provenance(const fs::path& dir, const CLI::App& sub, std::uint64_t seed) {
  const nlohmann::json options = effective_options(sub);
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(options.dump())));
  const nlohmann::json doc = {{"tool", "sdx"},
                              {"version", SDX_VERSION},
                              {"command", sub.get_name()},
                              {"seed", seed},
                              {"config_hash", hash},
                              {"options", options}};
  fs::create_directories(dir);
  write_text_file(dir / "provenance.json", dump_json(doc));
}

void print_json(const nlohmann::json& doc) { std::cout << doc.dump(2) << "\n"; }

Manifest require_manifest(const fs::path& path) {
  if (path.empty()) fail(Errc::kInvalidArgument, "--manifest is required");
  return load_manifest(path);
}

std::vector<Song> load_songs(const Manifest& manifest) {
  std::vector<Song> songs;
  songs.reserve(manifest.songs.size());
  for (std::size_t i = 0; i < manifest.songs.size(); ++i) songs.push_back(load_song(manifest, i));
  return songs;
}

SeparatorPtr make_separator(const std::string& spec, const Stems* clean, const fs::path& workdir) {
  if (spec == "oracle") {
    if (!clean) fail(Errc::kInvalidArgument, "the oracle separator needs clean reference stems");
    return oracle_irm(*clean);
  }
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  if (kind == "passthrough") return passthrough(parse_source_class(arg));
  if (kind == "external") return external_separator(arg, workdir);
  if (kind == "toy") {
    auto doc = nlohmann::json::parse(read_text_file(arg), nullptr, false);
    if (doc.is_discarded()) fail(Errc::kSchemaError, arg + ": not JSON");
    return std::make_shared<ToyMaskModel>(ToyMaskModel::from_json(doc));
  }
  fail(Errc::kInvalidArgument, "unknown separator '" + spec + "'");
}

}  // namespace sdx::cli
