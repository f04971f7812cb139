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

#include "sdx/listen.hpp"

#include <cstring>
#include <limits>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "listen_fixture.hpp"
#include "sdx/manifest.hpp"
#include "sdx/wav.hpp"

namespace sdx {
namespace {

using test::TempDir;
using test::thrown;

const Stimulus& by_id(const StimulusStore& store, const std::string& id) {
  for (const auto& s : store.stimuli) {
    if (s.id == id) return s;
  }
  throw std::runtime_error("no stimulus " + id);
}

std::size_t count_files(const std::filesystem::path& dir) {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) n += e.is_regular_file();
  return n;
}

// --- stimuli -------------------------------------------------------------------

TEST(Stimuli, OneModelOneSongOneSegment) {
  TempDir dir;
  const auto store = test::listen_store(dir.path(), 1, 1, 1);
  EXPECT_EQ(store.slots.size(), 1u);
  EXPECT_EQ(store.stimuli.size(), 8u);
  std::map<StimulusKind, int> kinds;
  for (const auto& s : store.stimuli) ++kinds[s.kind];
  EXPECT_EQ(kinds[StimulusKind::kExtraction], 4);
  EXPECT_EQ(kinds[StimulusKind::kResidual], 4);
  EXPECT_EQ(count_files(dir / "clips"), 9u);
  EXPECT_TRUE(std::filesystem::exists(dir / "stimuli.json"));
}

TEST(Stimuli, ThreeModelsTenSongsFourSegments) {
  TempDir dir;
  const auto store = test::listen_store(dir.path(), 3, 10, 4, 0.1);
  EXPECT_EQ(store.stimuli.size(), 960u);
  EXPECT_EQ(store.slots.size(), 40u);
  EXPECT_EQ(count_files(dir / "clips"), 1000u);
  std::set<std::string> ids;
  for (const auto& s : store.stimuli) ids.insert(s.id);
  for (const auto& s : store.slots) ids.insert(s.reference_id);
  EXPECT_EQ(ids.size(), 1000u);
}

TEST(Stimuli, ResidualPlusExtractionIsTheReference) {
  TempDir dir;
  const auto store = test::listen_store(dir.path(), 2, 1, 2);
  for (const auto& slot : store.slots) {
    const AudioBuffer ref = load_wav(store.clip_path(slot.reference_id));
    for (const auto& model : store.models) {
      for (SourceClass c : kAllClasses) {
        const AudioBuffer ext = load_wav(store.clip_path(store.find(model, slot.index, c, StimulusKind::kExtraction).id));
        const AudioBuffer res = load_wav(store.clip_path(store.find(model, slot.index, c, StimulusKind::kResidual).id));
        ASSERT_EQ(ext.frames(), ref.frames());
        EXPECT_LE((ext + res - ref).max_abs(), 1e-6);
      }
    }
  }
}

TEST(Stimuli, IdsDoNotEncodeModels) {
  TempDir dir;
  const auto store = test::listen_store(dir.path());
  for (const auto& s : store.stimuli) {
    for (const auto& m : store.models) EXPECT_EQ(s.id.find(m), std::string::npos);
    EXPECT_EQ(s.path.string().find(s.model), std::string::npos);
  }
}

TEST(Stimuli, StoreReloads) {
  TempDir dir;
  const auto store = test::listen_store(dir.path());
  const auto loaded = StimulusStore::load(dir.path());
  EXPECT_EQ(loaded.to_json(), store.to_json());
  EXPECT_EQ(loaded.clip_path(store.stimuli[5].id), store.clip_path(store.stimuli[5].id));
  EXPECT_EQ(thrown([&] { StimulusStore::load(dir / "missing"); }), Errc::kMissingFile);
}

TEST(Stimuli, MissingEstimates) {
  TempDir dir;
  const std::vector<ModelEstimates> models{estimates_from_directory("ghost", dir / "nowhere")};
  const auto songs = test::listen_songs(1, 1.0);
  StimulusConfig cfg;
  cfg.segments_per_song = 1;
  cfg.segment_seconds = 0.25;
  EXPECT_EQ(thrown([&] { prepare_stimuli(models, songs, cfg, dir / "out"); }), Errc::kMissingEstimates);
}

TEST(Stimuli, SeparatorModels) {
  TempDir dir;
  const std::vector<ModelEstimates> models{estimates_from_separator("pass", std::make_shared<Passthrough>(SourceClass::kVocals)),
                                           estimates_from_separator("bass-only", std::make_shared<Passthrough>(SourceClass::kBass))};
  StimulusConfig cfg;
  cfg.segments_per_song = 1;
  cfg.segment_seconds = 0.25;
  const auto store = prepare_stimuli(models, test::listen_songs(1, 1.0), cfg, dir.path());
  const auto& slot = store.slots[0];
  const AudioBuffer ref = load_wav(store.clip_path(slot.reference_id));
  const AudioBuffer vox = load_wav(store.clip_path(store.find("pass", 0, SourceClass::kVocals, StimulusKind::kExtraction).id));
  EXPECT_LE((vox - ref).max_abs(), 1e-6);
}

// --- service -------------------------------------------------------------------

class ListenService : public ::testing::Test {
 protected:
  void SetUp() override { store_ = test::listen_store(dir_ / "store"); }
  ListeningTest service(int per_cell = 3, const std::string& state = "state") {
    return ListeningTest(store_, test::listen_config(dir_ / state, per_cell));
  }
  std::size_t log_lines(const std::string& state = "state") {
    const auto path = dir_ / state / "comparisons.jsonl";
    if (!std::filesystem::exists(path)) return 0;
    const std::string text = read_text_file(path);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
  }

  TempDir dir_;
  StimulusStore store_;
};

TEST_F(ListenService, FreshSessionServesFirstOfSeventyTwo) {
  auto svc = service();
  const auto s = svc.create_session("p1", AssessorCategory::kProducer, "headphones");
  const auto p = svc.next_comparison(s.id);
  EXPECT_EQ(p.index, 0u);
  EXPECT_EQ(p.total, 72u);
  EXPECT_EQ(svc.next_comparison(s.id).comparison_id, p.comparison_id);
}

TEST_F(ListenService, SidesShareSegmentAndKindButNotModel) {
  auto svc = service();
  const auto s = svc.create_session("p1", AssessorCategory::kProducer);
  for (int i = 0; i < 72; ++i) {
    const auto p = svc.next_comparison(s.id);
    const auto& a = by_id(store_, p.a.id);
    const auto& b = by_id(store_, p.b.id);
    ASSERT_NE(a.model, b.model);
    ASSERT_EQ(a.slot, b.slot);
    ASSERT_EQ(a.source, b.source);
    ASSERT_EQ(a.kind, b.kind);
    ASSERT_EQ(a.source, p.source);
    ASSERT_EQ(a.kind, p.kind);
    ASSERT_EQ(p.reference.id, store_.slots[a.slot].reference_id);
    svc.submit_result({p.comparison_id, i % 2 ? Choice::kA : Choice::kB, 5.0, 1});
  }
  EXPECT_EQ(thrown([&] { svc.next_comparison(s.id); }), Errc::kPlanExhausted);
  EXPECT_TRUE(svc.session(s.id).complete());
}

TEST_F(ListenService, PayloadCarriesNoModelIds) {
  auto svc = service();
  const auto s = svc.create_session("p1", AssessorCategory::kMusicianEducator);
  for (int i = 0; i < 10; ++i) {
    const auto p = svc.next_comparison(s.id);
    const std::string text = to_json(p).dump();
    for (const auto& m : store_.models) EXPECT_EQ(text.find(m), std::string::npos) << text;
    svc.submit_result({p.comparison_id, Choice::kA, 1.0, 0});
  }
}

TEST_F(ListenService, SideAssignmentIsBalanced) {
  auto svc = service();
  std::map<std::string, int> on_a, total;
  for (int k = 0; k < 20; ++k) {
    const auto s = svc.create_session("assessor" + std::to_string(k), AssessorCategory::kProducer);
    for (int i = 0; i < 72; ++i) {
      const auto p = svc.next_comparison(s.id);
      ++on_a[by_id(store_, p.a.id).model];
      ++total[by_id(store_, p.a.id).model];
      ++total[by_id(store_, p.b.id).model];
      svc.submit_result({p.comparison_id, Choice::kA, 1.0, 0});
    }
  }
  for (const auto& m : store_.models) {
    const double frac = static_cast<double>(on_a[m]) / total[m];
    EXPECT_GE(frac, 0.4) << m;
    EXPECT_LE(frac, 0.6) << m;
  }
}

TEST_F(ListenService, SubmitAppendsAndUpdates) {
  auto svc = service();
  const auto s = svc.create_session("p1", AssessorCategory::kProducer);
  const auto p = svc.next_comparison(s.id);
  const auto winner = by_id(store_, p.b.id).model;
  const double before = svc.ratings().at(winner).mu;
  const auto r = svc.submit_result({p.comparison_id, Choice::kB, 12.5, 3});
  EXPECT_EQ(r.winner(), winner);
  EXPECT_EQ(r.elapsed_seconds, 12.5);
  EXPECT_EQ(r.switch_count, 3);
  EXPECT_EQ(r.assessor, "p1");
  EXPECT_EQ(log_lines(), 1u);
  EXPECT_GT(svc.ratings().at(winner).mu, before);
  EXPECT_EQ(svc.session(s.id).cursor, 1u);
  EXPECT_EQ(svc.records().size(), 1u);
}

TEST_F(ListenService, DuplicateAndUnknownSubmissions) {
  auto svc = service();
  const auto s = svc.create_session("p1", AssessorCategory::kProducer);
  const auto p = svc.next_comparison(s.id);
  svc.submit_result({p.comparison_id, Choice::kA, 1.0, 0});
  const auto ratings = svc.ratings();
  EXPECT_EQ(thrown([&] { svc.submit_result({p.comparison_id, Choice::kB, 1.0, 0}); }), Errc::kDuplicateSubmission);
  EXPECT_EQ(log_lines(), 1u);
  EXPECT_EQ(svc.ratings(), ratings);
  EXPECT_EQ(thrown([&] { svc.submit_result({s.id + ":5", Choice::kA, 1.0, 0}); }), Errc::kUnknownComparison);
  EXPECT_EQ(thrown([&] { svc.submit_result({"nobody:1", Choice::kA, 1.0, 0}); }), Errc::kUnknownComparison);
  EXPECT_EQ(thrown([&] { svc.submit_result({"garbage", Choice::kA, 1.0, 0}); }), Errc::kUnknownComparison);
  EXPECT_EQ(thrown([&] { svc.submit_result({s.id + ":1x", Choice::kA, 1.0, 0}); }), Errc::kUnknownComparison);
  EXPECT_EQ(thrown([&] { svc.submit_result({s.id + ":1", Choice::kA, -1.0, 0}); }), Errc::kInvalidArgument);
  EXPECT_EQ(log_lines(), 1u);
  EXPECT_EQ(thrown([&] { svc.next_comparison("session-9999"); }), Errc::kUnknownSession);
}

TEST_F(ListenService, OneSessionPerAssessor) {
  auto svc = service();
  const auto a = svc.create_session("p1", AssessorCategory::kProducer);
  const auto b = svc.create_session("p1", AssessorCategory::kMusicianEducator);
  const auto c = svc.create_session("p2", AssessorCategory::kMusicianEducator);
  EXPECT_EQ(a.id, b.id);
  EXPECT_EQ(b.category, AssessorCategory::kProducer);
  EXPECT_NE(a.id, c.id);
  EXPECT_EQ(thrown([&] { svc.create_session("", AssessorCategory::kProducer); }), Errc::kInvalidArgument);
}

TEST_F(ListenService, CrashBetweenAppendAndUpdateReplaysExactly) {
  // Reference trajectory without interruption.
  std::vector<std::map<std::string, Rating>> expected;
  std::vector<Choice> choices;
  {
    auto ref = service(3, "reference");
    const auto s = ref.create_session("p1", AssessorCategory::kProducer);
    for (int i = 0; i < 30; ++i) {
      const auto p = ref.next_comparison(s.id);
      choices.push_back((i * 7) % 3 ? Choice::kA : Choice::kB);
      ref.submit_result({p.comparison_id, choices.back(), 1.0 + i, i % 4});
      expected.push_back(ref.ratings());
    }
  }
  std::string session_id;
  {
    auto svc = service();
    session_id = svc.create_session("p1", AssessorCategory::kProducer).id;
    for (int i = 0; i < 12; ++i) {
      const auto p = svc.next_comparison(session_id);
      svc.submit_result({p.comparison_id, choices[static_cast<std::size_t>(i)], 1.0 + i, i % 4});
    }
    const auto p = svc.next_comparison(session_id);
    svc.set_after_append_hook([] { throw std::runtime_error("crash"); });
    EXPECT_THROW(svc.submit_result({p.comparison_id, choices[12], 13.0, 0}), std::runtime_error);
    EXPECT_EQ(svc.ratings(), expected[11]);
  }
  auto svc = service();
  EXPECT_EQ(svc.ratings(), expected[12]);
  EXPECT_EQ(svc.session(session_id).cursor, 13u);
  EXPECT_EQ(svc.ratings(), replay(svc.records(), store_.models).ratings());
  for (std::size_t i = 13; i < 30; ++i) {
    const auto p = svc.next_comparison(session_id);
    svc.submit_result({p.comparison_id, choices[i], 1.0 + static_cast<double>(i), static_cast<int>(i % 4)});
    EXPECT_EQ(svc.ratings(), expected[i]) << i;
  }
  EXPECT_EQ(read_text_file(dir_ / "state" / "comparisons.jsonl"),
            read_text_file(dir_ / "reference" / "comparisons.jsonl"));
}

TEST_F(ListenService, RestoresSessionsAcrossRestarts) {
  std::string id;
  {
    auto svc = service();
    id = svc.create_session("p1", AssessorCategory::kMusicianEducator, "monitors").id;
    for (int i = 0; i < 3; ++i) svc.submit_result({svc.next_comparison(id).comparison_id, Choice::kA, 1.0, 0});
  }
  auto svc = service();
  const auto s = svc.session(id);
  EXPECT_EQ(s.cursor, 3u);
  EXPECT_EQ(s.category, AssessorCategory::kMusicianEducator);
  EXPECT_EQ(s.equipment, "monitors");
  EXPECT_EQ(svc.create_session("p1", AssessorCategory::kProducer).id, id);
  EXPECT_EQ(svc.next_comparison(id).index, 3u);
}

TEST_F(ListenService, TamperedLogIsRejected) {
  {
    auto svc = service();
    const auto id = svc.create_session("p1", AssessorCategory::kProducer).id;
    svc.submit_result({svc.next_comparison(id).comparison_id, Choice::kA, 1.0, 0});
  }
  const auto path = dir_ / "state" / "comparisons.jsonl";
  auto rec = parse_comparison_log(read_text_file(path)).front();
  rec.assessor = "intruder";
  write_text_file(path, to_jsonl(rec));
  EXPECT_EQ(thrown([&] { service(); }), Errc::kLogMismatch);
  rec.assessor = "p1";
  rec.source = rec.source == SourceClass::kVocals ? SourceClass::kBass : SourceClass::kVocals;
  write_text_file(path, to_jsonl(rec));
  EXPECT_EQ(thrown([&] { service(); }), Errc::kLogMismatch);
  write_text_file(path, "{broken\n");
  EXPECT_EQ(thrown([&] { service(); }), Errc::kSchemaError);
}

TEST_F(ListenService, StatsByCategory) {
  auto svc = service();
  EXPECT_EQ(svc.stats()["comparisons"], 0);
  const auto p = svc.create_session("p1", AssessorCategory::kProducer).id;
  const auto m = svc.create_session("m1", AssessorCategory::kMusicianEducator).id;
  svc.submit_result({svc.next_comparison(p).comparison_id, Choice::kA, 10.0, 2});
  svc.submit_result({svc.next_comparison(m).comparison_id, Choice::kB, 20.0, 4});
  const auto stats = svc.stats();
  EXPECT_EQ(stats["comparisons"], 2);
  EXPECT_DOUBLE_EQ(stats["elapsed_seconds"]["mean"].get<double>(), 15.0);
  EXPECT_DOUBLE_EQ(stats["elapsed_seconds"]["std"].get<double>(), 5.0);
  EXPECT_TRUE(stats["win_matrices"].contains("producer"));
  EXPECT_TRUE(stats["win_matrices"].contains("musician_educator"));
  EXPECT_EQ(svc.standings()["matches"], 2);
}

TEST_F(ListenService, AudioIsValidated) {
  auto svc = service();
  const auto& clip = store_.stimuli[3];
  const auto bytes = svc.audio_bytes(clip.id);
  EXPECT_EQ(decode_wav(bytes).frames(), store_.clip_frames(clip.id));
  EXPECT_EQ(svc.audio_bytes(store_.slots[0].reference_id).substr(0, 4), "RIFF");
  EXPECT_EQ(thrown([&] { svc.audio_bytes("s0000"); }), Errc::kInvalidArgument);

  // Wrong length.
  save_wav(AudioBuffer(10), store_.clip_path(clip.id), WavFormat::kFloat32);
  EXPECT_EQ(thrown([&] { svc.audio_bytes(clip.id); }), Errc::kInvalidAudio);
  // Non-finite samples written behind the store's back.
  const auto other = store_.stimuli[4].id;
  std::string raw = read_text_file(store_.clip_path(other));
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(raw.data() + raw.size() - sizeof nan, &nan, sizeof nan);
  write_text_file(store_.clip_path(other), raw);
  const auto code = thrown([&] { svc.audio_bytes(other); });
  ASSERT_TRUE(code);
  EXPECT_TRUE(*code == Errc::kInvalidAudio || *code == Errc::kMalformedFile);
}

TEST(AssessorCategory, Parsing) {
  EXPECT_EQ(parse_assessor_category("Producer"), AssessorCategory::kProducer);
  EXPECT_EQ(parse_assessor_category("Musician-Educator"), AssessorCategory::kMusicianEducator);
  EXPECT_EQ(parse_assessor_category("musician_educator"), AssessorCategory::kMusicianEducator);
  EXPECT_EQ(thrown([] { parse_assessor_category("critic"); }), Errc::kInvalidArgument);
}

}  // namespace
}  // namespace sdx
