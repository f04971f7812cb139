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

#include <cmath>
#include <numbers>
#include <tuple>

#include "fixtures.hpp"
#include "sdx/filter.hpp"
#include "sdx/stft.hpp"

namespace sdx {
namespace {

constexpr double kPi = std::numbers::pi;

// Closed-form squared magnitude of the bilinear Butterworth designs.
double oracle_lowpass_power(int n, double fc, double f) {
  const double r = std::tan(kPi * f / kSampleRate) / std::tan(kPi * fc / kSampleRate);
  return 1.0 / (1.0 + std::pow(r, 2.0 * n));
}

double oracle_bandpass_power(int n, double fl, double fh, double f) {
  const double wl = std::tan(kPi * fl / kSampleRate);
  const double wh = std::tan(kPi * fh / kSampleRate);
  const double w = std::tan(kPi * f / kSampleRate);
  const double x = (w * w - wl * wh) / (w * (wh - wl));
  return 1.0 / (1.0 + std::pow(x, 2.0 * n));
}

TEST(DesignFilter, LowpassDcGainIsOne) {
  const auto c = design_filter(FilterSpec::lowpass(4, 1000.0));
  EXPECT_NEAR(std::abs(frequency_response(c, 0.0)), 1.0, 1e-12);
}

TEST(DesignFilter, LowpassCutoffIsMinusThreeDb) {
  const auto c = design_filter(FilterSpec::lowpass(4, 1000.0));
  EXPECT_NEAR(magnitude_db(c, 1000.0), -3.0, 0.5);
}

TEST(DesignFilter, SixthOrderStopband) {
  const auto c = design_filter(FilterSpec::lowpass(6, 1000.0));
  EXPECT_LE(magnitude_db(c, 4000.0), -60.0);
}

TEST(DesignFilter, Deterministic) {
  const auto spec = FilterSpec::bandpass(7, 321.0, 8765.0);
  EXPECT_EQ(design_filter(spec), design_filter(spec));
}

class LowpassOracle : public ::testing::TestWithParam<std::tuple<int, double>> {};

TEST_P(LowpassOracle, MatchesClosedForm) {
  const auto [order, fc] = GetParam();
  const auto c = design_filter(FilterSpec::lowpass(order, fc));
  for (double f = 10.0; f < 22000.0; f *= 1.19) {
    const double got = std::norm(frequency_response(c, f));
    EXPECT_NEAR(got, oracle_lowpass_power(order, fc, f), 1e-9) << "f=" << f;
  }
  EXPECT_NEAR(magnitude_db(c, fc), 10.0 * std::log10(0.5), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Orders, LowpassOracle,
                         ::testing::Combine(::testing::Range(3, 10), ::testing::Values(900.0, 3000.0, 8999.0)));

class BandpassOracle : public ::testing::TestWithParam<std::tuple<int, double, double>> {};

TEST_P(BandpassOracle, MatchesClosedForm) {
  const auto [order, fl, fh] = GetParam();
  const auto c = design_filter(FilterSpec::bandpass(order, fl, fh));
  EXPECT_EQ(c.sections.size(), static_cast<std::size_t>(order));
  for (double f = 10.0; f < 22000.0; f *= 1.19) {
    const double got = std::norm(frequency_response(c, f));
    EXPECT_NEAR(got, oracle_bandpass_power(order, fl, fh, f), 1e-8) << "f=" << f;
  }
  EXPECT_NEAR(magnitude_db(c, fl), -3.0, 0.5);
  EXPECT_NEAR(magnitude_db(c, fh), -3.0, 0.5);
}

INSTANTIATE_TEST_SUITE_P(Orders, BandpassOracle,
                         ::testing::Values(std::tuple{3, 200.0, 8000.0}, std::tuple{4, 600.0, 10000.0},
                                           std::tuple{5, 400.0, 9000.0}, std::tuple{9, 250.0, 9999.0}));

TEST(DesignFilter, InvalidSpecs) {
  EXPECT_EQ(test::thrown([] { design_filter(FilterSpec::lowpass(2, 1000.0)); }), Errc::kInvalidSpec);
  EXPECT_EQ(test::thrown([] { design_filter(FilterSpec::lowpass(10, 1000.0)); }), Errc::kInvalidSpec);
  EXPECT_EQ(test::thrown([] { design_filter(FilterSpec::lowpass(4, 23000.0)); }), Errc::kInvalidSpec);
  EXPECT_EQ(test::thrown([] { design_filter(FilterSpec::bandpass(4, 5000.0, 1000.0)); }), Errc::kInvalidSpec);
}

TEST(ApplyFilter, ZeroInZeroOut) {
  const auto c = design_filter(FilterSpec::lowpass(5, 2000.0));
  EXPECT_TRUE(apply_filter(AudioBuffer(300), c).is_silent());
}

TEST(ApplyFilter, ImpulseMatchesDirectRecurrence) {
  const auto c = design_filter(FilterSpec::bandpass(3, 300.0, 9000.0));
  AudioBuffer x(256);
  x.at(0, 0) = 1.0;
  x.at(1, 0) = 1.0;
  const AudioBuffer y = apply_filter(x, c);

  std::vector<double> h(256, 0.0);
  h[0] = 1.0;
  for (const Biquad& s : c.sections) {
    std::vector<double> out(h.size());
    for (std::size_t n = 0; n < h.size(); ++n) {
      const double x1 = n >= 1 ? h[n - 1] : 0.0, x2 = n >= 2 ? h[n - 2] : 0.0;
      const double y1 = n >= 1 ? out[n - 1] : 0.0, y2 = n >= 2 ? out[n - 2] : 0.0;
      out[n] = s.b0 * h[n] + s.b1 * x1 + s.b2 * x2 - s.a1 * y1 - s.a2 * y2;
    }
    h = out;
  }
  for (std::size_t n = 0; n < h.size(); ++n) {
    EXPECT_NEAR(y.at(0, n), h[n], 1e-12);
    EXPECT_NEAR(y.at(1, n), h[n], 1e-12);
  }
}

double band_energy(const AudioBuffer& b, double lo_hz) {
  const FrameSpec spec{4096, 1024, WindowKind::kHann};
  const Spectrogram s = stft(b, spec);
  const auto first = static_cast<std::size_t>(lo_hz / kSampleRate * 4096.0);
  double e = 0.0;
  for (int c = 0; c < kChannels; ++c)
    for (std::size_t f = 0; f < s.num_frames; ++f)
      for (std::size_t k = first; k < s.bins; ++k) e += std::norm(s.at(c, f, k));
  return e;
}

TEST(ApplyFilter, LowpassAttenuatesHighBand) {
  const AudioBuffer x = test::noise(kSampleRate, 11);
  const AudioBuffer y = apply_filter(x, design_filter(FilterSpec::lowpass(4, 900.0)));
  EXPECT_EQ(y.frames(), x.frames());
  EXPECT_GE(10.0 * std::log10(band_energy(x, 2000.0) / band_energy(y, 2000.0)), 20.0);
}

TEST(ApplyFilter, Linear) {
  const auto c = design_filter(FilterSpec::lowpass(9, 1234.0));
  const AudioBuffer x = test::noise(2000, 12), y = test::noise(2000, 13);
  const double a = 1.3, b = -0.4;
  const AudioBuffer lhs = apply_filter(a * x + b * y, c);
  const AudioBuffer rhs = a * apply_filter(x, c) + b * apply_filter(y, c);
  EXPECT_LE(max_abs_diff(lhs, rhs), 1e-9 * std::max(1.0, lhs.max_abs()));
}

TEST(FilterKind, ParseRoundTrip) {
  EXPECT_EQ(parse_filter_kind(to_string(FilterKind::kBandpass)), FilterKind::kBandpass);
  EXPECT_EQ(test::thrown([] { parse_filter_kind("highpass"); }), Errc::kInvalidSpec);
}

}  // namespace
}  // namespace sdx
