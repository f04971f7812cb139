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

#include "sdx/filter.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sdx/error.hpp"

namespace sdx {
namespace {

using cd = std::complex<double>;

constexpr double kFs = static_cast<double>(kSampleRate);
constexpr double kNyquist = kFs / 2.0;

double prewarp(double hz) { return 2.0 * kFs * std::tan(std::numbers::pi * hz / kFs); }

cd bilinear(cd s) { return (2.0 * kFs + s) / (2.0 * kFs - s); }

// Unit-circle Butterworth prototype pole k of an order-n filter.
cd prototype_pole(int k, int n) {
  const double theta = std::numbers::pi * (2.0 * k + n + 1.0) / (2.0 * n);
  return std::polar(1.0, theta);
}

Biquad section_from_poles(cd z1, cd z2, double b0, double b1, double b2) {
  Biquad s;
  s.b0 = b0;
  s.b1 = b1;
  s.b2 = b2;
  s.a1 = -(z1 + z2).real();
  s.a2 = (z1 * z2).real();
  return s;
}

cd section_response(const Biquad& s, double omega) {
  const cd z1 = std::polar(1.0, -omega);
  const cd z2 = z1 * z1;
  return (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
}

FilterCoefficients design_lowpass(int order, double cutoff_hz) {
  const double wc = prewarp(cutoff_hz);
  FilterCoefficients out;
  for (int k = 0; k < order / 2; ++k) {
    // Poles with positive imaginary part; each pairs with its conjugate.
    const cd z = bilinear(wc * prototype_pole(k, order));
    Biquad s = section_from_poles(z, std::conj(z), 1.0, 2.0, 1.0);
    const double g = (1.0 + s.a1 + s.a2) / 4.0;
    s.b0 *= g;
    s.b1 *= g;
    s.b2 *= g;
    out.sections.push_back(s);
  }
  if (order % 2 == 1) {
    const double zr = (2.0 * kFs - wc) / (2.0 * kFs + wc);
    Biquad s;
    s.a1 = -zr;
    s.a2 = 0.0;
    const double g = (1.0 - zr) / 2.0;
    s.b0 = g;
    s.b1 = g;
    s.b2 = 0.0;
    out.sections.push_back(s);
  }
  return out;
}

FilterCoefficients design_bandpass(int order, double low_hz, double high_hz) {
  const double wl = prewarp(low_hz);
  const double wh = prewarp(high_hz);
  const double bw = wh - wl;
  const double w0sq = wl * wh;

  // Lowpass-to-bandpass maps each prototype pole q to the roots of
  // s^2 - q*bw*s + w0^2 = 0.
  auto roots = [&](cd q) {
    const cd b = q * bw;
    const cd disc = std::sqrt(b * b - 4.0 * w0sq);
    return std::pair<cd, cd>{(b + disc) / 2.0, (b - disc) / 2.0};
  };

  FilterCoefficients out;
  for (int k = 0; k < order / 2; ++k) {
    const auto [s1, s2] = roots(prototype_pole(k, order));
    for (cd s : {s1, s2}) {
      const cd z = bilinear(s);
      out.sections.push_back(section_from_poles(z, std::conj(z), 1.0, 0.0, -1.0));
    }
  }
  if (order % 2 == 1) {
    // Real prototype pole: the two roots are either a conjugate pair or both real.
    const auto [s1, s2] = roots(cd(-1.0, 0.0));
    out.sections.push_back(section_from_poles(bilinear(s1), bilinear(s2), 1.0, 0.0, -1.0));
  }

  const double omega0 = 2.0 * std::atan(std::sqrt(w0sq) / (2.0 * kFs));
  cd h = 1.0;
  for (const auto& s : out.sections) h *= section_response(s, omega0);
  const double g = std::pow(1.0 / std::abs(h), 1.0 / static_cast<double>(out.sections.size()));
  for (auto& s : out.sections) {
    s.b0 *= g;
    s.b1 *= g;
    s.b2 *= g;
  }
  return out;
}

}  // namespace

std::string_view to_string(FilterKind kind) {
  return kind == FilterKind::kLowpass ? "lowpass" : "bandpass";
}

FilterKind parse_filter_kind(std::string_view name) {
  if (name == "lowpass") return FilterKind::kLowpass;
  if (name == "bandpass") return FilterKind::kBandpass;
  fail(Errc::kInvalidSpec, "unknown filter kind '" + std::string(name) + "'");
}

void validate(const FilterSpec& spec) {
  if (spec.order < kMinFilterOrder || spec.order > kMaxFilterOrder) {
    fail(Errc::kInvalidSpec, "filter order " + std::to_string(spec.order) + " outside [3, 9]");
  }
  auto in_band = [](double hz) { return std::isfinite(hz) && hz > 0.0 && hz < kNyquist; };
  if (!in_band(spec.cutoff_high_hz)) {
    fail(Errc::kInvalidSpec, "cutoff " + std::to_string(spec.cutoff_high_hz) + " Hz outside (0, 22050)");
  }
  if (spec.kind == FilterKind::kBandpass) {
    if (!in_band(spec.cutoff_low_hz)) {
      fail(Errc::kInvalidSpec, "low cutoff " + std::to_string(spec.cutoff_low_hz) + " Hz outside (0, 22050)");
    }
    if (!(spec.cutoff_low_hz < spec.cutoff_high_hz)) {
      fail(Errc::kInvalidSpec, "bandpass low cutoff must be below high cutoff");
    }
  }
}

FilterCoefficients design_filter(const FilterSpec& spec) {
  validate(spec);
  if (spec.kind == FilterKind::kLowpass) return design_lowpass(spec.order, spec.cutoff_high_hz);
  return design_bandpass(spec.order, spec.cutoff_low_hz, spec.cutoff_high_hz);
}

std::complex<double> frequency_response(const FilterCoefficients& coeffs, double frequency_hz) {
  const double omega = 2.0 * std::numbers::pi * frequency_hz / kFs;
  cd h = 1.0;
  for (const auto& s : coeffs.sections) h *= section_response(s, omega);
  return h;
}

double magnitude_db(const FilterCoefficients& coeffs, double frequency_hz) {
  return amplitude_to_db(std::abs(frequency_response(coeffs, frequency_hz)));
}

AudioBuffer apply_filter(const AudioBuffer& buffer, const FilterCoefficients& coeffs) {
  require_finite(buffer, "apply_filter");
  AudioBuffer out = buffer;
  for (int c = 0; c < kChannels; ++c) {
    auto x = out.channel(c);
    for (const auto& s : coeffs.sections) {
      double z1 = 0.0, z2 = 0.0;
      for (double& v : x) {
        const double in = v;
        const double y = s.b0 * in + z1;
        z1 = s.b1 * in - s.a1 * y + z2;
        z2 = s.b2 * in - s.a2 * y;
        v = y;
      }
    }
  }
  return out;
}

}  // namespace sdx
