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

#include "sdx/manifest.hpp"

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "sdx/error.hpp"

namespace sdx {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  fail(Errc::kSchemaError, "manifest: " + what);
}

const json& require_field(const json& obj, const char* key, json::value_t type) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(std::string("missing field '") + key + "'");
  if (it->type() != type) schema_error(std::string("field '") + key + "' has wrong type");
  return *it;
}

}  // namespace

std::size_t Manifest::find_song(std::string_view id) const {
  for (std::size_t i = 0; i < songs.size(); ++i) {
    if (songs[i].id == id) return i;
  }
  fail(Errc::kInvalidArgument, "song '" + std::string(id) + "' not in manifest");
}

Manifest manifest_from_json(const json& doc, const fs::path& root) {
  if (!doc.is_object()) schema_error("top level must be an object");
  Manifest m;
  m.root = root;
  if (auto it = doc.find("version"); it != doc.end()) {
    if (!it->is_number_integer()) schema_error("'version' must be an integer");
    m.version = it->get<int>();
  }

  if (auto it = doc.find("taxonomy"); it != doc.end()) {
    if (!it->is_object()) schema_error("'taxonomy' must be an object");
    Taxonomy t;
    for (const auto& [label, cls] : it->items()) {
      if (!cls.is_string()) schema_error("taxonomy entry '" + label + "' must be a string");
      try {
        t.add(label, parse_source_class(cls.get<std::string>()));
      } catch (const Error& e) {
        schema_error(std::string("taxonomy entry '") + label + "': " + e.what());
      }
    }
    m.taxonomy = std::move(t);
  }

  if (auto it = doc.find("provenance"); it != doc.end()) {
    if (!it->is_object()) schema_error("'provenance' must be an object");
    const json& p = *it;
    if (auto g = p.find("generator"); g != p.end() && g->is_string()) m.provenance.generator = *g;
    if (auto s = p.find("seed"); s != p.end() && !s->is_null()) {
      if (!s->is_number_unsigned() && !s->is_number_integer()) schema_error("provenance seed must be an integer");
      m.provenance.seed = s->get<std::uint64_t>();
    }
    if (auto pm = p.find("parent_manifest"); pm != p.end() && pm->is_string()) {
      m.provenance.parent_manifest = pm->get<std::string>();
    }
    if (auto d = p.find("details"); d != p.end()) m.provenance.details = *d;
  }

  const json& songs = require_field(doc, "songs", json::value_t::array);
  std::set<std::string> ids;
  for (const json& s : songs) {
    if (!s.is_object()) schema_error("song entries must be objects");
    ManifestSong song;
    song.id = require_field(s, "id", json::value_t::string).get<std::string>();
    if (song.id.empty()) schema_error("song id must be non-empty");
    if (!ids.insert(song.id).second) fail(Errc::kDuplicateSongId, "manifest: duplicate song id '" + song.id + "'");

    const json& stems = require_field(s, "stems", json::value_t::object);
    for (const auto& [label, value] : stems.items()) {
      if (label.empty()) schema_error("song '" + song.id + "' has an empty stem label");
      m.taxonomy.resolve(label);
      if (value.is_string()) {
        song.stems.push_back({label, value.get<std::string>()});
      } else if (value.is_array()) {
        for (const json& p : value) {
          if (!p.is_string()) schema_error("stem paths must be strings");
          song.stems.push_back({label, p.get<std::string>()});
        }
      } else {
        schema_error("stem '" + label + "' must be a path or a list of paths");
      }
    }
    if (auto mix = s.find("mixture"); mix != s.end() && !mix->is_null()) {
      if (!mix->is_string()) schema_error("'mixture' must be a path");
      song.mixture = mix->get<std::string>();
    }
    if (auto notes = s.find("notes"); notes != s.end()) song.notes = *notes;
    m.songs.push_back(std::move(song));
  }
  return m;
}

json to_json(const Manifest& m) {
  json doc;
  doc["version"] = m.version;
  json songs = json::array();
  for (const auto& song : m.songs) {
    json s;
    s["id"] = song.id;
    json stems = json::object();
    for (const auto& ref : song.stems) {
      const std::string p = ref.path.generic_string();
      auto it = stems.find(ref.label);
      if (it == stems.end()) {
        stems[ref.label] = p;
      } else if (it->is_string()) {
        *it = json::array({*it, p});
      } else {
        it->push_back(p);
      }
    }
    s["stems"] = std::move(stems);
    if (song.mixture) s["mixture"] = song.mixture->generic_string();
    if (!song.notes.empty()) s["notes"] = song.notes;
    songs.push_back(std::move(s));
  }
  doc["songs"] = std::move(songs);
  json tax = json::object();
  for (const auto& [label, cls] : m.taxonomy.entries()) tax[label] = std::string(to_string(cls));
  doc["taxonomy"] = std::move(tax);
  json prov = json::object();
  prov["generator"] = m.provenance.generator;
  if (m.provenance.seed) prov["seed"] = *m.provenance.seed;
  if (m.provenance.parent_manifest) prov["parent_manifest"] = *m.provenance.parent_manifest;
  if (!m.provenance.details.empty()) prov["details"] = m.provenance.details;
  doc["provenance"] = std::move(prov);
  return doc;
}

Manifest load_manifest(const fs::path& path) {
  if (!fs::exists(path)) fail(Errc::kMissingFile, "manifest not found: " + path.string());
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    schema_error(std::string("invalid JSON: ") + e.what());
  }
  Manifest m = manifest_from_json(doc, path.parent_path());
  for (const auto& song : m.songs) {
    for (const auto& ref : song.stems) {
      const fs::path p = m.resolve(ref.path);
      if (!fs::exists(p)) fail(Errc::kMissingFile, "song '" + song.id + "': missing stem file " + p.string());
    }
    if (song.mixture && !fs::exists(m.resolve(*song.mixture))) {
      fail(Errc::kMissingFile, "song '" + song.id + "': missing mixture file " + m.resolve(*song.mixture).string());
    }
  }
  return m;
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
  write_text_file(path, dump_json(to_json(manifest)));
}

std::vector<RawStem> load_raw_stems(const Manifest& manifest, std::size_t song_index) {
  const ManifestSong& song = manifest.songs.at(song_index);
  std::vector<RawStem> out;
  out.reserve(song.stems.size());
  for (const auto& ref : song.stems) out.push_back({ref.label, load_wav(manifest.resolve(ref.path))});
  return out;
}

Song load_song(const Manifest& manifest, std::size_t song_index) {
  const ManifestSong& entry = manifest.songs.at(song_index);
  Song song;
  song.id = entry.id;
  const auto raw = load_raw_stems(manifest, song_index);
  song.stems = group_stems(raw, manifest.taxonomy);
  if (entry.mixture) {
    song.mixture = load_wav(manifest.resolve(*entry.mixture));
    require_same_length(*song.mixture, song.stems[SourceClass::kVocals], "song '" + entry.id + "' mixture");
  }
  return song;
}

ManifestSong write_class_song(const Song& song, const fs::path& root, WavFormat format) {
  ManifestSong entry;
  entry.id = song.id;
  for (SourceClass c : kAllClasses) {
    const fs::path rel = fs::path(song.id) / (std::string(to_string(c)) + ".wav");
    save_wav(song.stems[c], root / rel, format);
    entry.stems.push_back({std::string(to_string(c)), rel});
  }
  return entry;
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(Errc::kIoError, "short write to " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kMissingFile, "cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace sdx
