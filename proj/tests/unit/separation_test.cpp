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

#include <atomic>
#include <cmath>

#include "fixtures.hpp"
#include "sdx/evaluator.hpp"
#include "sdx/separation.hpp"
#include "sdx/synth.hpp"
#include "sdx/wav.hpp"

namespace sdx {
namespace {

Stems scale_all(const Stems& s, double g) {
  Stems out = s;
  for (SourceClass c : kAllClasses) out[c] *= g;
  return out;
}

double max_stems_diff(const Stems& a, const Stems& b) {
  double m = 0.0;
  for (SourceClass c : kAllClasses) m = std::max(m, max_abs_diff(a[c], b[c]));
  return m;
}

// Largest difference more than `margin` samples away from both ends and
// from every hard cut (multiples of `cut`; 0 for none).
double interior_diff(const Stems& a, const Stems& b, std::size_t margin, std::size_t cut = 0) {
  double m = 0.0;
  for (std::size_t i = margin; i + margin < a.frames(); ++i) {
    if (cut > 0) {
      const std::size_t r = i % cut;
      if (r < margin || cut - r <= margin) continue;
    }
    for (SourceClass c : kAllClasses)
      for (int ch = 0; ch < kChannels; ++ch) m = std::max(m, std::abs(a[c].at(ch, i) - b[c].at(ch, i)));
  }
  return m;
}

// Linear separator: fixed gains per class.
SeparatorPtr linear_separator() {
  return std::make_shared<FunctionSeparator>("linear", [](const AudioBuffer& x, std::ptrdiff_t) {
    Stems s;
    const std::array<double, 4> g{0.1, 0.2, 0.3, 0.4};
    for (SourceClass c : kAllClasses) s[c] = x * g[index_of(c)];
    return s;
  });
}

TEST(OracleIrm, SingleStemRoutesToItsClass) {
  Stems clean = Stems::silent(20000);
  clean[SourceClass::kDrums] = test::noise(20000, 1);
  const Stems est = oracle_irm(clean)->separate(clean.sum());
  EXPECT_GE(sdr_source(clean[SourceClass::kDrums], est[SourceClass::kDrums]), 60.0);
  for (SourceClass c : {SourceClass::kVocals, SourceClass::kBass, SourceClass::kOther})
    EXPECT_LE(est[c].max_abs(), 1e-9);
}

TEST(OracleIrm, DisjointSinesRecovered) {
  Stems clean = Stems::silent(4 * kSampleRate);
  clean[SourceClass::kVocals] = test::sine(660.0, 4 * kSampleRate, 0.4);
  clean[SourceClass::kBass] = test::sine(110.0, 4 * kSampleRate, 0.4);
  const Stems est = oracle_irm(clean)->separate(clean.sum());
  EXPECT_GE(sdr_source(clean[SourceClass::kVocals], est[SourceClass::kVocals]), 40.0);
  EXPECT_GE(sdr_source(clean[SourceClass::kBass], est[SourceClass::kBass]), 40.0);
}

TEST(OracleIrm, EstimatesSumToMixture) {
  const auto raw = synth_corpus(1, SynthConfig{0.5, 3, 0.1, true}, 2);
  const Song s = group_song(raw[0], Taxonomy::default_taxonomy());
  const AudioBuffer x = s.mix();
  const Stems est = oracle_irm(s.stems)->separate(x);
  EXPECT_LE(max_abs_diff(est.sum(), x), 1e-6);
  // Input unrelated to the references still sums back.
  const AudioBuffer other = test::noise(x.frames(), 3);
  EXPECT_LE(max_abs_diff(oracle_irm(s.stems)->separate(other).sum(), other), 1e-6);
}

TEST(Passthrough, RoutesEverything) {
  const AudioBuffer x = test::noise(1000, 4);
  const Stems s = passthrough(SourceClass::kVocals)->separate(x);
  EXPECT_EQ(s[SourceClass::kVocals], x);
  EXPECT_TRUE(s[SourceClass::kBass].is_silent());
  EXPECT_TRUE(residual(x, s[SourceClass::kVocals]).is_silent());
}

TEST(Passthrough, ScoresAreFiniteOnRealSong) {
  const auto raw = synth_corpus(1, SynthConfig{0.3, 3, 0.1, false}, 5);
  const Song s = group_song(raw[0], Taxonomy::default_taxonomy());
  const SdrReport r = sdr_song(s.stems, passthrough(SourceClass::kOther)->separate(s.mix()));
  EXPECT_TRUE(std::isfinite(r.mean));
  EXPECT_LT(r.mean, 10.0);
}

TEST(Separator, OutputLengthValidated) {
  FunctionSeparator bad("short", [](const AudioBuffer& x, std::ptrdiff_t) { return Stems::silent(x.frames() - 1); });
  EXPECT_EQ(test::thrown([&] { bad.separate(AudioBuffer(10)); }), Errc::kLengthMismatch);
}

TEST(External, Duplicator) {
  test::TempDir dir;
  const auto sep = external_separator(
      "for c in bass drums other vocals; do cp {input} {output}/$c.wav; done", dir / "work");
  AudioBuffer x = test::noise(500, 6);
  for (int c = 0; c < kChannels; ++c)
    for (auto& v : x.channel(c)) v = static_cast<float>(v);
  const Stems s = sep->separate(x);
  for (SourceClass c : kAllClasses) EXPECT_EQ(s[c], x);
}

TEST(External, AppendsPathsWithoutPlaceholders) {
  test::TempDir dir;
  write_text_file(dir / "dup.sh", "#!/bin/sh\nfor c in bass drums other vocals; do cp \"$1\" \"$2/$c.wav\"; done\n");
  const auto sep = external_separator("sh " + (dir / "dup.sh").string(), dir / "work");
  EXPECT_EQ(sep->separate(AudioBuffer(10))[SourceClass::kBass].frames(), 10U);
}

TEST(External, NonzeroExitCapturesStderr) {
  test::TempDir dir;
  const auto sep = external_separator("echo boom-marker >&2; exit 3", dir / "work");
  try {
    sep->separate(AudioBuffer(10));
    FAIL() << "expected ProcessFailed";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kProcessFailed);
    EXPECT_NE(std::string(e.what()).find("boom-marker"), std::string::npos);
  }
}

TEST(External, MissingOutputNamesClass) {
  test::TempDir dir;
  const auto sep = external_separator("for c in bass drums other; do cp {input} {output}/$c.wav; done", dir / "work");
  try {
    sep->separate(AudioBuffer(10));
    FAIL() << "expected MissingOutput";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMissingOutput);
    EXPECT_NE(std::string(e.what()).find("vocals"), std::string::npos);
  }
}

TEST(External, WrongLength) {
  test::TempDir dir;
  const AudioBuffer shorter(5);
  save_wav(shorter, dir / "short.wav");
  const auto sep = external_separator(
      "for c in bass drums other vocals; do cp " + (dir / "short.wav").string() + " {output}/$c.wav; done",
      dir / "work");
  EXPECT_EQ(test::thrown([&] { sep->separate(AudioBuffer(10)); }), Errc::kLengthMismatch);
}

TEST(Overlapped, ZeroOverlapPassthroughIsExact) {
  const AudioBuffer x = test::noise(10007, 7);
  const auto sep = passthrough(SourceClass::kBass);
  EXPECT_EQ(infer_overlapped(*sep, x, 1000, 0.0), sep->separate(x));
}

TEST(Overlapped, LengthPreservedForMatrix) {
  const auto sep = linear_separator();
  for (std::size_t n : {1UL, 999UL, 1000UL, 4567UL}) {
    const AudioBuffer x = test::noise(n, n);
    for (std::size_t w : {40UL, 1000UL, 5000UL}) {
      for (double ov : {0.0, 0.25, 0.5, 0.95}) {
        const Stems s = infer_overlapped(*sep, x, w, ov, 2);
        ASSERT_EQ(s.frames(), n);
        EXPECT_LE(max_stems_diff(s, sep->separate(x)), 1e-12) << n << " " << w << " " << ov;
      }
    }
  }
}

TEST(Overlapped, OracleOnStationaryMatchesWholeSignal) {
  const Stems clean = test::disjoint_stems(3 * kSampleRate);
  const AudioBuffer x = clean.sum();
  const auto sep = oracle_irm(clean);
  const Stems whole = sep->separate(x);
  for (double ov : {0.0, 0.5, 0.95}) {
    const Stems win = infer_overlapped(*sep, x, kSampleRate, ov, 1);
    const std::size_t cut = ov == 0.0 ? kSampleRate : 0;
    EXPECT_LE(interior_diff(win, whole, kMaskFrames.frame_len, cut), 1e-3) << "overlap " << ov;
  }
}

TEST(Overlapped, HigherOverlapNoWorse) {
  const auto raw = synth_corpus(1, SynthConfig{3.0, 4, 0.1, true}, 8);
  const Song s = group_song(raw[0], Taxonomy::default_taxonomy());
  const auto sep = oracle_irm(s.stems);
  const double lo = sdr_song(s.stems, infer_overlapped(*sep, s.mix(), kSampleRate, 0.5)).mean;
  const double hi = sdr_song(s.stems, infer_overlapped(*sep, s.mix(), kSampleRate, 0.95)).mean;
  EXPECT_GE(hi, lo - 0.1);
}

TEST(Overlapped, Errors) {
  const auto sep = linear_separator();
  EXPECT_EQ(test::thrown([&] { infer_overlapped(*sep, AudioBuffer(100), 1, 0.0); }), Errc::kWindowTooShort);
  EXPECT_EQ(test::thrown([&] { infer_overlapped(*sep, AudioBuffer(100), 10, 1.0); }), Errc::kInvalidArgument);
}

TEST(Shifted, SingleZeroShiftIsDirect) {
  const Stems clean = test::disjoint_stems(5000);
  const auto sep = oracle_irm(clean);
  const AudioBuffer x = clean.sum();
  EXPECT_EQ(infer_shifted(*sep, x, 1, 0, 3), sep->separate(x));
}

TEST(Shifted, EquivariantSeparatorUnchanged) {
  const AudioBuffer x = test::noise(3000, 9);
  const auto sep = passthrough(SourceClass::kDrums);
  EXPECT_LE(max_stems_diff(infer_shifted(*sep, x, 5, 700, 1), sep->separate(x)), 1e-12);
}

TEST(Shifted, DeterministicPerSeed) {
  const Stems clean = test::disjoint_stems(8000);
  const auto sep = oracle_irm(clean);
  const AudioBuffer x = clean.sum();
  EXPECT_EQ(infer_shifted(*sep, x, 3, 4000, 11), infer_shifted(*sep, x, 3, 4000, 11));
}

TEST(Shifted, OracleStaysAligned) {
  const Stems clean = test::disjoint_stems(8000);
  const auto sep = oracle_irm(clean);
  const Stems s = infer_shifted(*sep, clean.sum(), 4, 2000, 2);
  const SdrReport r = sdr_song(clean, s);
  EXPECT_GE(r.mean, 30.0);
}

TEST(PhaseInverted, LinearSeparatorUnchanged) {
  const AudioBuffer x = test::noise(2000, 10);
  const auto lin = linear_separator();
  EXPECT_LE(max_stems_diff(infer_phase_inverted(*lin, x), lin->separate(x)), 1e-9);
  const auto pt = passthrough(SourceClass::kOther);
  EXPECT_LE(max_stems_diff(infer_phase_inverted(*pt, x), pt->separate(x)), 1e-9);
}

TEST(PhaseInverted, SilenceStaysSilent) {
  FunctionSeparator silent("silent", [](const AudioBuffer& x, std::ptrdiff_t) { return Stems::silent(x.frames()); });
  const Stems s = infer_phase_inverted(silent, test::noise(100, 1));
  for (SourceClass c : kAllClasses) EXPECT_TRUE(s[c].is_silent());
}

TEST(PhaseInverted, OracleIsSignInvariant) {
  const auto raw = synth_corpus(1, SynthConfig{0.3, 3, 0.1, false}, 12);
  const Song s = group_song(raw[0], Taxonomy::default_taxonomy());
  const auto sep = oracle_irm(s.stems);
  EXPECT_LE(max_stems_diff(infer_phase_inverted(*sep, s.mix()), sep->separate(s.mix())), 1e-6);
}

TEST(Augmented, ComposesWrappers) {
  const Stems clean = test::disjoint_stems(20000);
  const auto sep = oracle_irm(clean);
  InferenceAugmentation aug;
  aug.n_shifts = 2;
  aug.max_shift = 3000;
  aug.window_len = 8000;
  aug.overlap_ratio = 0.5;
  aug.phase_invert = true;
  const Stems a = infer_augmented(*sep, clean.sum(), aug, 4, 2);
  EXPECT_EQ(a.frames(), 20000U);
  EXPECT_EQ(a, infer_augmented(*sep, clean.sum(), aug, 4, 1));
  EXPECT_GE(sdr_song(clean, a).mean, 20.0);
  aug.n_shifts = 0;
  EXPECT_EQ(test::thrown([&] { validate(aug); }), Errc::kInvalidArgument);
}

TEST(Blend, Definitions) {
  const Stems a = test::disjoint_stems(300), b = scale_all(test::disjoint_stems(300, 0.7), -1.0);
  const std::vector<Stems> one{a};
  EXPECT_EQ(blend(one, BlendWeights::uniform({"a"})), a);
  const std::vector<Stems> same{a, a};
  EXPECT_LE(max_stems_diff(blend(same, BlendWeights::uniform({"a", "b"})), a), 1e-15);

  BlendWeights w;
  w.models = {"a", "b"};
  for (auto& row : w.weights) row = {0.25, 0.75};
  const std::vector<Stems> ab{a, b};
  const Stems mixed = blend(ab, w);
  for (SourceClass c : kAllClasses)
    for (int ch = 0; ch < kChannels; ++ch)
      for (std::size_t i = 0; i < 300; ++i)
        EXPECT_NEAR(mixed[c].at(ch, i), 0.25 * a[c].at(ch, i) + 0.75 * b[c].at(ch, i), 1e-15);
}

TEST(Blend, CommutesWithResidual) {
  const AudioBuffer x = test::noise(400, 1);
  const Stems a = linear_separator()->separate(x);
  const Stems b = passthrough(SourceClass::kVocals)->separate(x);
  BlendWeights w;
  w.models = {"a", "b"};
  for (auto& row : w.weights) row = {0.3, 0.7};
  const std::vector<Stems> ab{a, b};
  const Stems blended = blend(ab, w);
  Stems ra, rb;
  for (SourceClass c : kAllClasses) {
    ra[c] = residual(x, a[c]);
    rb[c] = residual(x, b[c]);
  }
  const std::vector<Stems> residuals{ra, rb};
  const Stems rblend = blend(residuals, w);
  for (SourceClass c : kAllClasses) EXPECT_LE(max_abs_diff(residual(x, blended[c]), rblend[c]), 1e-12);
}

TEST(Blend, WeightMismatch) {
  BlendWeights w;
  w.models = {"a", "b"};
  for (auto& row : w.weights) row = {0.5, 0.6};
  EXPECT_EQ(test::thrown([&] { w.validate(); }), Errc::kWeightMismatch);
  const std::vector<Stems> one{test::disjoint_stems(10)};
  EXPECT_EQ(test::thrown([&] { blend(one, BlendWeights::uniform({"a", "b"})); }), Errc::kWeightMismatch);
  BlendWeights neg;
  neg.models = {"a", "b"};
  for (auto& row : neg.weights) row = {1.5, -0.5};
  EXPECT_EQ(test::thrown([&] { neg.validate(); }), Errc::kWeightMismatch);
}

TEST(TwoStage, OraclePipeline) {
  const Stems clean = test::disjoint_stems(20000);
  const AudioBuffer x = clean.sum();
  const auto vocal = std::make_shared<FixedSeparator>(clean);
  Stems rest_refs = clean;
  rest_refs[SourceClass::kVocals] = AudioBuffer(20000);
  const auto rest = oracle_irm(rest_refs);
  const Stems s = two_stage_instrumental(*vocal, *rest, x);
  for (SourceClass c : kAllClasses) EXPECT_GE(sdr_source(clean[c], s[c]), 40.0) << to_string(c);
}

TEST(TwoStage, SilentVocalsPassInstrumental) {
  const AudioBuffer x = test::noise(1000, 2);
  FunctionSeparator silent("silent", [](const AudioBuffer& m, std::ptrdiff_t) { return Stems::silent(m.frames()); });
  std::optional<AudioBuffer> seen;
  FunctionSeparator spy("spy", [&](const AudioBuffer& m, std::ptrdiff_t) {
    seen = m;
    return Stems::silent(m.frames());
  });
  const Stems s = two_stage_instrumental(silent, spy, x);
  ASSERT_TRUE(seen.has_value());
  EXPECT_EQ(*seen, x);
  EXPECT_TRUE(s[SourceClass::kVocals].is_silent());

  const auto lin = linear_separator();
  two_stage_instrumental(*lin, spy, x);
  EXPECT_EQ(*seen, x - lin->separate(x)[SourceClass::kVocals]);
}

TEST(Residual, Identities) {
  const AudioBuffer x = test::noise(100, 1), e = test::noise(100, 2);
  EXPECT_TRUE(residual(x, x).is_silent());
  EXPECT_EQ(residual(x, AudioBuffer(100)), x);
  EXPECT_LE(max_abs_diff(residual(x, e) + e, x), 1e-12);
  EXPECT_EQ(test::thrown([&] { residual(x, AudioBuffer(99)); }), Errc::kLengthMismatch);
}

}  // namespace
}  // namespace sdx
