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
#include <cmath>
#include <limits>
#include <set>

#include "fixtures.hpp"
#include "sdx/evaluator.hpp"
#include "sdx/manifest.hpp"
#include "sdx/separation.hpp"
#include "sdx/synth.hpp"

namespace sdx {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Estimate whose residual has energy 10^(-db/10) times the target's.
AudioBuffer at_sdr(const AudioBuffer& target, double db, std::uint64_t seed) {
  AudioBuffer n = test::noise(target.frames(), seed);
  n *= std::sqrt(target.energy() * std::pow(10.0, -db / 10.0) / n.energy());
  return target + n;
}

TEST(SdrSource, PerfectIsInfinite) {
  const AudioBuffer s = test::noise(1000, 1);
  EXPECT_EQ(sdr_source(s, s), kInf);
}

TEST(SdrSource, HalfScale) {
  const AudioBuffer s = test::noise(1000, 2);
  EXPECT_NEAR(sdr_source(s, 0.5 * s), 6.020599913279624, 1e-9);
}

TEST(SdrSource, OrthogonalInterference) {
  const AudioBuffer s = test::sine(441.0, kSampleRate, 1.0);
  const AudioBuffer e = s + test::sine(882.0, kSampleRate, 0.1);
  EXPECT_NEAR(sdr_source(s, e), 20.0, 1e-6);
}

TEST(SdrSource, ScaleGrid) {
  const AudioBuffer s = test::noise(777, 3);
  for (double a : {-2.0, -0.5, 0.0, 0.1, 0.5, 0.9, 0.99, 1.01, 1.5, 3.0}) {
    EXPECT_NEAR(sdr_source(s, a * s), -10.0 * std::log10((1.0 - a) * (1.0 - a)), 1e-9) << a;
  }
}

TEST(SdrSource, ChannelSymmetric) {
  const AudioBuffer s = test::noise(500, 4), e = test::noise(500, 5);
  const AudioBuffer s_swapped(std::vector<double>(s.channel(1).begin(), s.channel(1).end()),
                              std::vector<double>(s.channel(0).begin(), s.channel(0).end()));
  const AudioBuffer e_swapped(std::vector<double>(e.channel(1).begin(), e.channel(1).end()),
                              std::vector<double>(e.channel(0).begin(), e.channel(0).end()));
  EXPECT_NEAR(sdr_source(s, e), sdr_source(s_swapped, e_swapped), 1e-12);
}

TEST(SdrSource, Errors) {
  EXPECT_EQ(test::thrown([] { sdr_source(AudioBuffer(3), AudioBuffer(4)); }), Errc::kLengthMismatch);
  EXPECT_EQ(test::thrown([] { sdr_source(AudioBuffer(3), AudioBuffer(3)); }), Errc::kSilentTarget);
}

TEST(SdrSong, PerfectIsInfinite) {
  const Stems s = test::disjoint_stems(300);
  const SdrReport r = sdr_song(s, s);
  for (SourceClass c : kAllClasses) EXPECT_EQ(r[c], kInf);
  EXPECT_EQ(r.mean, kInf);
}

TEST(SdrSong, MeanOfConstructedValues) {
  const Stems s = test::disjoint_stems(4000);
  Stems e;
  const std::array<double, 4> db{8.0, 8.0, 4.0, 4.0};
  for (SourceClass c : kAllClasses) e[c] = at_sdr(s[c], db[index_of(c)], 10 + index_of(c));
  const SdrReport r = sdr_song(s, e);
  for (SourceClass c : kAllClasses) EXPECT_NEAR(*r[c], db[index_of(c)], 1e-9);
  EXPECT_NEAR(r.mean, 6.0, 1e-9);
}

TEST(SdrSong, QuarterMeanForRandomInputs) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Stems s, e;
    for (SourceClass c : kAllClasses) {
      s[c] = test::noise(256, seed * 8 + index_of(c));
      e[c] = test::noise(256, seed * 8 + 4 + index_of(c));
    }
    const SdrReport r = sdr_song(s, e);
    double sum = 0.0;
    for (SourceClass c : kAllClasses) sum += sdr_source(s[c], e[c]);
    EXPECT_NEAR(r.mean, sum / 4.0, 1e-12);
  }
}

TEST(SdrSong, SilentTargetPolicy) {
  Stems s = test::disjoint_stems(1000);
  s[SourceClass::kBass] = AudioBuffer(1000);
  Stems e = s;
  e[SourceClass::kVocals] = 0.5 * s[SourceClass::kVocals];
  const SdrReport r = sdr_song(s, e);
  EXPECT_FALSE(r[SourceClass::kBass].has_value());
  EXPECT_EQ(r.mean, kInf);
  EvalPolicy strict;
  strict.silent_target = SilentTargetPolicy::kError;
  EXPECT_EQ(test::thrown([&] { sdr_song(s, e, strict); }), Errc::kSilentTarget);
}

TEST(SdrSong, OracleOnThreeSourceSong) {
  std::vector<std::string> labels{"vocals", "bass", "guitar"};
  const RawSong raw = synth_raw_song("three", labels, SynthConfig{1.0, 3, 0.1, true}, 5);
  const Song song = group_song(raw, Taxonomy::default_taxonomy());
  const Stems est = oracle_irm(song.stems)->separate(song.mix());
  const SdrReport r = sdr_song(song.stems, est);
  EXPECT_FALSE(r[SourceClass::kDrums].has_value());
  EXPECT_GE(r.mean, 10.0);
}

SdrReport report_with_mean(double mean) {
  SdrReport r;
  for (std::size_t i = 0; i < kNumClasses; ++i) r.per_source[i] = mean;
  r.mean = mean;
  return r;
}

TEST(SdrDataset, Basics) {
  const SdrReport one = report_with_mean(3.25);
  const std::vector<SdrReport> single{one};
  EXPECT_EQ(sdr_dataset(single).mean, 3.25);
  const std::vector<SdrReport> two{report_with_mean(5.0), report_with_mean(7.0)};
  EXPECT_DOUBLE_EQ(sdr_dataset(two).mean, 6.0);
  EXPECT_EQ(test::thrown([] { sdr_dataset({}); }), Errc::kEmptyInput);
}

TEST(SdrDataset, IdenticalReportsExact) {
  SdrReport r;
  r.per_source = {1.1, 2.3, 0.7, 9.9};
  r.mean = report_mean(r.per_source);
  const std::vector<SdrReport> same(13, r);
  const SdrReport d = sdr_dataset(same);
  EXPECT_EQ(d.mean, r.mean);
  for (std::size_t i = 0; i < kNumClasses; ++i) EXPECT_EQ(d.per_source[i], r.per_source[i]);
}

TEST(SdrDataset, TwentySevenSongs) {
  Rng rng(9);
  std::vector<SdrReport> reports;
  long double total = 0.0L;
  for (int i = 0; i < 27; ++i) {
    SdrReport r;
    long double song = 0.0L;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      r.per_source[c] = rng.uniform(-5.0, 15.0);
      song += *r.per_source[c];
    }
    r.mean = report_mean(r.per_source);
    total += song / 4.0L;
    reports.push_back(r);
  }
  EXPECT_NEAR(sdr_dataset(reports).mean, static_cast<double>(total / 27.0L), 1e-12);
}

TEST(SdrDataset, InfinityPolicies) {
  SdrReport r;
  r.per_source = {kInf, 10.0, 10.0, 10.0};
  r.mean = report_mean(r.per_source);
  EXPECT_EQ(r.mean, kInf);
  const std::vector<SdrReport> reports{r};
  EXPECT_DOUBLE_EQ(sdr_dataset(reports).mean, (100.0 + 30.0) / 4.0);
  EvalPolicy skip;
  skip.infinity = InfinityPolicy::kSkip;
  const SdrReport d = sdr_dataset(reports, skip);
  EXPECT_DOUBLE_EQ(d.mean, 10.0);
  EXPECT_FALSE(d.per_source[0].has_value());
}

TEST(SisecMedian, Examples) {
  EXPECT_EQ(sdr_sisec_median({{4.5}}), 4.5);
  EXPECT_EQ(sdr_sisec_median({{1.0, 2.0, 100.0}}), 2.0);
  EXPECT_EQ(test::thrown([] { sdr_sisec_median({}); }), Errc::kEmptyInput);
}

TEST(SisecMedian, MatchesSortOracle) {
  Rng rng(3);
  std::vector<std::vector<double>> songs(5);
  for (auto& s : songs) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 9));
    for (std::size_t i = 0; i < n; ++i) s.push_back(rng.uniform(-10.0, 20.0));
  }
  auto oracle_median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.size() % 2 ? v[v.size() / 2] : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2.0;
  };
  std::vector<double> meds;
  for (const auto& s : songs) meds.push_back(oracle_median(s));
  EXPECT_DOUBLE_EQ(sdr_sisec_median(songs), oracle_median(meds));
}

TEST(SegmentSdrs, DropsPartialAndSilent) {
  AudioBuffer t = test::noise(3 * kSampleRate + 100, 1);
  for (std::size_t i = kSampleRate; i < 2 * kSampleRate; ++i) t.at(0, i) = t.at(1, i) = 0.0;
  const auto v = segment_sdrs(t, 0.5 * t);
  ASSERT_EQ(v.size(), 2U);
  for (double x : v) EXPECT_NEAR(x, 6.0206, 1e-3);
}

TEST(PhaseSubset, Nesting) {
  std::vector<std::string> ids;
  for (int i = 0; i < 30; ++i) ids.push_back("song" + std::to_string(i));
  EXPECT_EQ(phase_subset(std::span(ids).first(27), Phase::kFinal, 1).size(), 27U);
  const auto p1 = phase_subset(ids, Phase::kPhase1, 4), p2 = phase_subset(ids, Phase::kPhase2, 4),
             fin = phase_subset(ids, Phase::kFinal, 4);
  EXPECT_EQ(p1.size(), 9U);
  EXPECT_EQ(p2.size(), 18U);
  const std::set<std::string> s2(p2.begin(), p2.end()), sf(fin.begin(), fin.end());
  for (const auto& id : p1) EXPECT_TRUE(s2.count(id));
  for (const auto& id : p2) EXPECT_TRUE(sf.count(id));
  EXPECT_EQ(p1, phase_subset(ids, Phase::kPhase1, 4));
  EXPECT_EQ(test::thrown([&] { phase_subset(std::span(ids).first(26), Phase::kPhase1, 1); }), Errc::kTooFewSongs);
}

TEST(PhaseSubset, SeedsDiffer) {
  std::vector<std::string> ids;
  for (int i = 0; i < 27; ++i) ids.push_back("s" + std::to_string(i));
  std::set<std::vector<std::string>> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto p = phase_subset(ids, Phase::kPhase1, seed);
    std::sort(p.begin(), p.end());
    seen.insert(p);
  }
  EXPECT_GE(seen.size(), 99U);
}

TEST(Leaderboard, OrderedAndStable) {
  Leaderboard board(Phase::kFinal);
  Rng rng(1);
  std::vector<std::pair<double, std::string>> oracle;
  for (int i = 0; i < 30; ++i) {
    const double m = std::round(rng.uniform(0.0, 5.0));  // force ties
    const std::string id = "sub" + std::to_string(rng.uniform_int(0, 999)) + "_" + std::to_string(i);
    board.insert({id, report_with_mean(m)});
    oracle.emplace_back(-m, id);
    std::sort(oracle.begin(), oracle.end());
    ASSERT_EQ(board.rows().size(), oracle.size());
    for (std::size_t k = 0; k < oracle.size(); ++k) EXPECT_EQ(board.rows()[k].id, oracle[k].second);
  }
  const std::string table = board.table();
  EXPECT_EQ(table.rfind("Rank", 0), 0U);
  EXPECT_NE(table.find("Mean"), std::string::npos);
  EXPECT_LT(table.find("Bass"), table.find("Drums"));
  EXPECT_LT(table.find("Other"), table.find("Vocals"));
  EXPECT_EQ(board.to_json().at("rows").size(), 30U);
}

TEST(ReportJson, InfinityAndSkippedRoundTrip) {
  SdrReport r;
  r.per_source = {kInf, std::nullopt, 3.5, -1.25};
  r.mean = report_mean(r.per_source);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("vocals"), "inf");
  EXPECT_TRUE(j.at("bass").is_null());
  const SdrReport back = report_from_json(j);
  EXPECT_EQ(back.per_source, r.per_source);
  EXPECT_EQ(back.mean, r.mean);
}

TEST(EvaluateDirectory, ScoresTreeAndReportsMissing) {
  test::TempDir dir;
  const auto raw = synth_corpus(3, SynthConfig{0.2, 2, 0.1, false}, 31);
  const Manifest clean = write_raw_corpus(raw, dir / "ref", "fixture");
  for (std::size_t i = 0; i < clean.songs.size(); ++i) {
    const Song s = load_song(clean, i);
    Stems e = s.stems;
    for (SourceClass c : kAllClasses) e[c] *= 0.5;
    save_estimates(e, dir / "est" / s.id);
  }
  const EvaluationResult r = evaluate_directory(clean, dir / "est", EvalPolicy{}, 2);
  ASSERT_EQ(r.songs.size(), 3U);
  EXPECT_NEAR(r.overall.mean, 6.0206, 1e-4);
  EXPECT_EQ(r.to_json().at("songs").size(), 3U);

  const std::vector<std::string> one{clean.songs[1].id};
  EXPECT_EQ(evaluate_directory(clean, dir / "est", EvalPolicy{}, 1, one).songs.size(), 1U);

  std::filesystem::remove_all(dir / "est" / clean.songs[2].id);
  EXPECT_EQ(test::thrown([&] { evaluate_directory(clean, dir / "est"); }), Errc::kMissingEstimates);
}

}  // namespace
}  // namespace sdx
