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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sdx/dataset.hpp"
#include "sdx/manifest.hpp"
#include "sdx/separation.hpp"

namespace sdx::cli {

namespace fs = std::filesystem;

// Flags shared by every subcommand.
struct Common {
  std::uint64_t seed = 0;
  int jobs = 1;
  fs::path manifest;
  fs::path out;
  fs::path config;
};

// Subcommand name -> body, run after parsing and config merging.
using Actions = std::map<std::string, std::function<void(CLI::App& sub)>>;

// Adds --seed, --jobs, --manifest, --out, --config to a subcommand.
void add_common(CLI::App& sub, Common& common);

// Fills options the user did not pass from the --config JSON object.
void apply_config(CLI::App& sub, const fs::path& config);

// Effective option values of a subcommand (command line, config, defaults).
nlohmann::json effective_options(const CLI::App& sub);

// Writes <dir>/provenance.json: tool version, command, seed, config hash.
void write_provenance(const fs::path& dir, const CLI::App& sub, std::uint64_t seed);

void print_json(const nlohmann::json& doc);

Manifest require_manifest(const fs::path& path);
std::vector<Song> load_songs(const Manifest& manifest);

// "oracle" (needs clean stems), "passthrough:<class>", "external:<command>",
// "toy:<model.json>".
SeparatorPtr make_separator(const std::string& spec, const Stems* clean, const fs::path& workdir);

void register_data(CLI::App& app, Common& common, Actions& actions);
void register_eval(CLI::App& app, Common& common, Actions& actions);
void register_robust(CLI::App& app, Common& common, Actions& actions);
void register_listen(CLI::App& app, Common& common, Actions& actions);

}  // namespace sdx::cli
