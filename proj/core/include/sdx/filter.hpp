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

#include <complex>
#include <string_view>
#include <vector>

#include "sdx/audio.hpp"

namespace sdx {

enum class FilterKind { kLowpass, kBandpass };

std::string_view to_string(FilterKind kind);
FilterKind parse_filter_kind(std::string_view name);

// Butterworth filter request. A lowpass uses only `cutoff_high_hz`. A bandpass
// of order N has N poles per band edge (2N in total).
struct FilterSpec {
  FilterKind kind = FilterKind::kLowpass;
  int order = 4;
  double cutoff_low_hz = 0.0;
  double cutoff_high_hz = 1000.0;

  static FilterSpec lowpass(int order, double cutoff_hz) {
    return {FilterKind::kLowpass, order, 0.0, cutoff_hz};
  }
  static FilterSpec bandpass(int order, double low_hz, double high_hz) {
    return {FilterKind::kBandpass, order, low_hz, high_hz};
  }

  bool operator==(const FilterSpec&) const = default;
};

inline constexpr int kMinFilterOrder = 3;
inline constexpr int kMaxFilterOrder = 9;

// y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  bool operator==(const Biquad&) const = default;
};

struct FilterCoefficients {
  std::vector<Biquad> sections;

  bool operator==(const FilterCoefficients&) const = default;
};

// Throws InvalidSpec if the order or cutoffs are out of range.
void validate(const FilterSpec& spec);

// Digital Butterworth design via the bilinear transform with pre-warped band
// edges, so the response is exactly -3.01 dB at each cutoff. Lowpass sections
// are normalized to unit DC gain, bandpass to unit gain at the geometric
// center of the band.
FilterCoefficients design_filter(const FilterSpec& spec);

std::complex<double> frequency_response(const FilterCoefficients& coeffs, double frequency_hz);
double magnitude_db(const FilterCoefficients& coeffs, double frequency_hz);

// Causal cascade filtering per channel from a zero initial state.
AudioBuffer apply_filter(const AudioBuffer& buffer, const FilterCoefficients& coeffs);

}  // namespace sdx
