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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdx/dataset.hpp"
#include "sdx/wav.hpp"

namespace sdx {

struct StemRef {
  std::string label;
  std::filesystem::path path;  // relative to the manifest directory

  bool operator==(const StemRef&) const = default;
};

struct ManifestSong {
  std::string id;
  std::vector<StemRef> stems;
  std::optional<std::filesystem::path> mixture;
  // Free-form per-song annotations (e.g. mixture-consistency flags).
  nlohmann::json notes = nlohmann::json::object();
};

struct Provenance {
  std::string generator;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> parent_manifest;
  nlohmann::json details = nlohmann::json::object();
};

// A dataset on disk: song entries hold paths, not audio. Audio is loaded per
// song on demand.
//
// JSON layout:
//   { "version": 1,
//     "songs": [ { "id": "...", "stems": { "<label>": "a.wav" | ["a.wav", ...] },
//                  "mixture": "mix.wav" } ],
//     "taxonomy": { "<label>": "vocals|bass|drums|other" },
//     "provenance": { "generator": "...", "seed": 7, "parent_manifest": "..." } }
struct Manifest {
  int version = 1;
  std::vector<ManifestSong> songs;
  Taxonomy taxonomy = Taxonomy::default_taxonomy();
  Provenance provenance;
  std::filesystem::path root;  // directory that relative paths resolve against

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : root / p;
  }
  std::size_t find_song(std::string_view id) const;
};

// Parses and validates structure: unique ids, non-empty labels, every label
// resolvable. Does not touch the filesystem.
Manifest manifest_from_json(const nlohmann::json& doc, const std::filesystem::path& root);
nlohmann::json to_json(const Manifest& manifest);

// Reads, validates and checks that every referenced file exists.
// Throws SchemaError, MissingFile, DuplicateSongId, UnknownLabel.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

std::vector<RawStem> load_raw_stems(const Manifest& manifest, std::size_t song_index);
// Loads and groups one song; the stored mixture, if any, is loaded too.
Song load_song(const Manifest& manifest, std::size_t song_index);

// Writes <root>/<song.id>/<class>.wav for the four classes and returns the
// matching manifest entry. The mixture is not written.
ManifestSong write_class_song(const Song& song, const std::filesystem::path& root,
                              WavFormat format = WavFormat::kFloat32);

// Deterministic JSON text (sorted keys, fixed indentation, trailing newline).
std::string dump_json(const nlohmann::json& doc);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace sdx
