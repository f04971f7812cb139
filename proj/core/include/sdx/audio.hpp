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

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace sdx {

inline constexpr int kSampleRate = 44100;
inline constexpr int kChannels = 2;

// Stereo block of 64-bit samples at 44.1 kHz. Both channels always have the
// same length. Values are nominally in [-1, 1] but never clamped.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  // Silent buffer of `frames` samples per channel.
  explicit AudioBuffer(std::size_t frames);
  AudioBuffer(std::vector<double> left, std::vector<double> right);

  static AudioBuffer mono(std::vector<double> samples);

  std::size_t frames() const noexcept { return channels_[0].size(); }
  bool empty() const noexcept { return frames() == 0; }
  int sample_rate() const noexcept { return kSampleRate; }
  double seconds() const noexcept { return static_cast<double>(frames()) / kSampleRate; }

  std::span<double> channel(int c) { return channels_[static_cast<std::size_t>(c)]; }
  std::span<const double> channel(int c) const { return channels_[static_cast<std::size_t>(c)]; }

  double& at(int c, std::size_t i) { return channels_[static_cast<std::size_t>(c)][i]; }
  double at(int c, std::size_t i) const { return channels_[static_cast<std::size_t>(c)][i]; }

  bool all_finite() const noexcept;
  bool is_silent() const noexcept;
  // Sum of squares over time and both channels.
  double energy() const noexcept;
  double max_abs() const noexcept;

  // Copy of [start, start + length); samples outside the buffer read as zero.
  AudioBuffer slice(std::ptrdiff_t start, std::size_t length) const;

  AudioBuffer& operator+=(const AudioBuffer& other);
  AudioBuffer& operator-=(const AudioBuffer& other);
  AudioBuffer& operator*=(double gain);

  friend AudioBuffer operator+(AudioBuffer a, const AudioBuffer& b) { return a += b; }
  friend AudioBuffer operator-(AudioBuffer a, const AudioBuffer& b) { return a -= b; }
  friend AudioBuffer operator*(AudioBuffer a, double g) { return a *= g; }
  friend AudioBuffer operator*(double g, AudioBuffer a) { return a *= g; }
  friend AudioBuffer operator-(AudioBuffer a) { return a *= -1.0; }

  bool operator==(const AudioBuffer&) const = default;

 private:
  std::array<std::vector<double>, kChannels> channels_;
};

// Throws InvalidAudio naming `what` if any sample is NaN or infinite.
void require_finite(const AudioBuffer& buffer, std::string_view what);
// Throws LengthMismatch unless both buffers have the same number of frames.
void require_same_length(const AudioBuffer& a, const AudioBuffer& b, std::string_view what);

// Largest per-sample absolute difference. Lengths must match.
double max_abs_diff(const AudioBuffer& a, const AudioBuffer& b);

double db_to_amplitude(double gain_db);
double amplitude_to_db(double amplitude);
double power_ratio_db(double numerator, double denominator);

AudioBuffer apply_gain_db(const AudioBuffer& buffer, double gain_db);

}  // namespace sdx
