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

#include <gtest/gtest.h>

#include <algorithm>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "sdx/corruptor.hpp"
#include "sdx/manifest.hpp"
#include "sdx/synth.hpp"
#include "sdx/wav.hpp"

namespace sdx {
namespace {

using nlohmann::json;

TEST(Taxonomy, DefaultCoversTenInstruments) {
  const Taxonomy t = Taxonomy::default_taxonomy();
  for (auto label : kDefaultInstruments) EXPECT_TRUE(t.find(label).has_value()) << label;
  EXPECT_EQ(t.resolve("vocals"), SourceClass::kVocals);
  EXPECT_EQ(t.resolve("bass"), SourceClass::kBass);
  EXPECT_EQ(t.resolve("percussion"), SourceClass::kDrums);
  EXPECT_EQ(t.resolve("  Guitar "), SourceClass::kOther);
}

TEST(Taxonomy, UnknownLabelIsError) {
  EXPECT_EQ(test::thrown([] { Taxonomy::default_taxonomy().resolve("el_gtr"); }), Errc::kUnknownLabel);
}

TEST(Taxonomy, Normalize) {
  EXPECT_EQ(Taxonomy::normalize(" Lead-Vocal Take"), "lead_vocal_take");
}

TEST(GroupStems, OneStemPerClassIsIdentity) {
  const Stems s = test::disjoint_stems(300);
  std::vector<RawStem> raw{{"vocals", s[SourceClass::kVocals]},
                           {"bass", s[SourceClass::kBass]},
                           {"drums", s[SourceClass::kDrums]},
                           {"piano", s[SourceClass::kOther]}};
  EXPECT_EQ(group_stems(raw, Taxonomy::default_taxonomy()), s);
}

TEST(GroupStems, OtherSumsMembers) {
  const AudioBuffer g1 = test::noise(200, 1), g2 = test::noise(200, 2), p = test::noise(200, 3);
  std::vector<RawStem> raw{{"guitar", g1}, {"guitar", g2}, {"piano", p}};
  const Stems s = group_stems(raw, Taxonomy::default_taxonomy());
  AudioBuffer want(200);
  for (int c = 0; c < kChannels; ++c)
    for (std::size_t i = 0; i < 200; ++i) want.at(c, i) = g1.at(c, i) + g2.at(c, i) + p.at(c, i);
  EXPECT_LE(max_abs_diff(s[SourceClass::kOther], want), 1e-15);
  EXPECT_TRUE(s[SourceClass::kVocals].is_silent());
  EXPECT_EQ(s[SourceClass::kBass].frames(), 200U);
}

TEST(GroupStems, Errors) {
  const Taxonomy t = Taxonomy::default_taxonomy();
  std::vector<RawStem> unknown{{"el_gtr", AudioBuffer(4)}};
  EXPECT_EQ(test::thrown([&] { group_stems(unknown, t); }), Errc::kUnknownLabel);
  std::vector<RawStem> ragged{{"bass", AudioBuffer(4)}, {"drums", AudioBuffer(5)}};
  EXPECT_EQ(test::thrown([&] { group_stems(ragged, t); }), Errc::kLengthMismatch);
}

TEST(GroupStems, SumIsConserved) {
  const auto songs = synth_corpus(5, SynthConfig{0.1, 2, 0.1, false}, 4);
  for (const RawSong& song : songs) {
    AudioBuffer raw_sum(song.stems.front().audio.frames());
    for (const auto& s : song.stems) raw_sum += s.audio;
    EXPECT_LE(max_abs_diff(group_stems(song.stems, Taxonomy::default_taxonomy()).sum(), raw_sum), 1e-15);
  }
}

TEST(Consistency, ExactSum) {
  Song song{"s", test::disjoint_stems(100), std::nullopt};
  song.mixture = song.stems.sum();
  const auto r = check_mixture_consistency(song, 1e-6);
  EXPECT_TRUE(r.consistent);
  EXPECT_EQ(r.max_error, 0.0);
}

TEST(Consistency, PerturbedSample) {
  Song song{"s", test::disjoint_stems(100), std::nullopt};
  song.mixture = song.stems.sum();
  song.mixture->at(1, 50) += 1e-3;
  const auto r = check_mixture_consistency(song, 1e-6);
  EXPECT_FALSE(r.consistent);
  EXPECT_NEAR(r.max_error, 1e-3, 1e-12);
}

TEST(Consistency, NoMixtureIsConsistent) {
  EXPECT_TRUE(check_mixture_consistency(Song{"s", test::disjoint_stems(10), std::nullopt}, 0.0).consistent);
}

TEST(Consistency, BleedingBreaksOriginalMixture) {
  std::vector<Song> songs;
  for (int i = 0; i < 3; ++i) {
    Song s{"s" + std::to_string(i), test::disjoint_stems(4000), std::nullopt};
    s.mixture = s.stems.sum();
    songs.push_back(s);
  }
  const BleedResult r = corrupt_bleeding(songs, BleedConfig{});
  for (std::size_t i = 0; i < songs.size(); ++i) {
    EXPECT_FALSE(r.original_mixture[i].consistent);
    Song corrupted = r.songs[i];
    corrupted.mixture = songs[i].mixture;
    EXPECT_FALSE(check_mixture_consistency(corrupted, 1e-6).consistent);
  }
}

TEST(Consistency, LabelNoiseKeepsMixture) {
  auto raw = synth_corpus(10, SynthConfig{0.1, 2, 0.1, false}, 8);
  for (auto& r : raw) {
    r.mixture = AudioBuffer(r.stems.front().audio.frames());
    for (const auto& s : r.stems) *r.mixture += s.audio;
  }
  const auto out = corrupt_label_noise(raw, LabelNoiseConfig{0.5, ConfusionMatrix::default_matrix(), 3});
  for (const RawSong& r : out.songs) {
    EXPECT_TRUE(check_mixture_consistency(group_song(r, Taxonomy::default_taxonomy()), 1e-6).consistent);
  }
}

TEST(Manifest, EmptySongList) {
  test::TempDir dir;
  write_text_file(dir / "m.json", R"({"version": 1, "songs": []})");
  const Manifest m = load_manifest(dir / "m.json");
  EXPECT_TRUE(m.songs.empty());
  EXPECT_EQ(m.root, dir.path());
}

TEST(Manifest, MissingWavNamesPath) {
  test::TempDir dir;
  write_text_file(dir / "m.json", R"({"songs": [{"id": "a", "stems": {"bass": "a/nothere.wav"}}]})");
  try {
    load_manifest(dir / "m.json");
    FAIL() << "expected MissingFile";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMissingFile);
    EXPECT_NE(std::string(e.what()).find("nothere.wav"), std::string::npos);
  }
}

TEST(Manifest, DuplicateAndSchemaErrors) {
  const json dup = json::parse(R"({"songs": [{"id": "a", "stems": {}}, {"id": "a", "stems": {}}]})");
  EXPECT_EQ(test::thrown([&] { manifest_from_json(dup, "."); }), Errc::kDuplicateSongId);
  EXPECT_EQ(test::thrown([] { manifest_from_json(json::parse(R"({"songs": 3})"), "."); }), Errc::kSchemaError);
  EXPECT_EQ(test::thrown([] { manifest_from_json(json::array(), "."); }), Errc::kSchemaError);
  const json unknown = json::parse(R"({"songs": [{"id": "a", "stems": {"kazoo": "k.wav"}}]})");
  EXPECT_EQ(test::thrown([&] { manifest_from_json(unknown, "."); }), Errc::kUnknownLabel);
  const json custom = json::parse(R"({"taxonomy": {"kazoo": "other"},
                                      "songs": [{"id": "a", "stems": {"kazoo": "k.wav"}}]})");
  EXPECT_EQ(manifest_from_json(custom, ".").songs.size(), 1U);
}

TEST(Manifest, ThreeSongFixture) {
  test::TempDir dir;
  const auto raw = synth_corpus(3, SynthConfig{0.05, 2, 0.1, false}, 21);
  const Manifest written = write_raw_corpus(raw, dir.path(), "fixture");
  save_manifest(written, dir / "manifest.json");
  const Manifest m = load_manifest(dir / "manifest.json");
  ASSERT_EQ(m.songs.size(), 3U);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(m.songs[i].id, raw[i].id);
    ASSERT_EQ(m.songs[i].stems.size(), raw[i].stems.size());
    // Stems come back grouped by label; match each one to its source.
    const auto loaded = load_raw_stems(m, i);
    for (const RawStem& got : loaded) {
      const bool found = std::any_of(raw[i].stems.begin(), raw[i].stems.end(), [&](const RawStem& want) {
        return want.label == got.label && max_abs_diff(want.audio, got.audio) <= 1e-7;
      });
      EXPECT_TRUE(found) << got.label;
    }
    const Song song = load_song(m, i);
    EXPECT_LE(max_abs_diff(song.stems.sum(), group_song(raw[i], m.taxonomy).stems.sum()), 1e-6);
  }
  EXPECT_EQ(m.provenance.generator, "fixture");
  EXPECT_EQ(to_json(m), to_json(written));
}

TEST(Manifest, DumpJsonIsSortedAndStable) {
  const json doc = json::parse(R"({"b": 1, "a": [2, 3]})");
  EXPECT_EQ(dump_json(doc), "{\n  \"a\": [\n    2,\n    3\n  ],\n  \"b\": 1\n}\n");
}

}  // namespace
}  // namespace sdx
