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

#include "sdx/audio.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdx/error.hpp"

namespace sdx {

AudioBuffer::AudioBuffer(std::size_t frames) {
  for (auto& ch : channels_) ch.assign(frames, 0.0);
}

AudioBuffer::AudioBuffer(std::vector<double> left, std::vector<double> right) {
  if (left.size() != right.size()) {
    fail(Errc::kLengthMismatch, "AudioBuffer: channel lengths differ (" +
                                    std::to_string(left.size()) + " vs " +
                                    std::to_string(right.size()) + ")");
  }
  channels_[0] = std::move(left);
  channels_[1] = std::move(right);
}

AudioBuffer AudioBuffer::mono(std::vector<double> samples) {
  auto copy = samples;
  return AudioBuffer(std::move(samples), std::move(copy));
}

bool AudioBuffer::all_finite() const noexcept {
  for (const auto& ch : channels_) {
    for (double v : ch) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

bool AudioBuffer::is_silent() const noexcept {
  for (const auto& ch : channels_) {
    for (double v : ch) {
      if (v != 0.0) return false;
    }
  }
  return true;
}

double AudioBuffer::energy() const noexcept {
  double e = 0.0;
  for (const auto& ch : channels_) {
    for (double v : ch) e += v * v;
  }
  return e;
}

double AudioBuffer::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& ch : channels_) {
    for (double v : ch) m = std::max(m, std::abs(v));
  }
  return m;
}

AudioBuffer AudioBuffer::slice(std::ptrdiff_t start, std::size_t length) const {
  AudioBuffer out(length);
  const auto n = static_cast<std::ptrdiff_t>(frames());
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(start, 0);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(start + static_cast<std::ptrdiff_t>(length), n);
  if (lo >= hi) return out;
  for (std::size_t c = 0; c < kChannels; ++c) {
    std::copy(channels_[c].begin() + lo, channels_[c].begin() + hi,
              out.channels_[c].begin() + (lo - start));
  }
  return out;
}

AudioBuffer& AudioBuffer::operator+=(const AudioBuffer& other) {
  require_same_length(*this, other, "add");
  for (std::size_t c = 0; c < kChannels; ++c) {
    auto& dst = channels_[c];
    const auto& src = other.channels_[c];
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  return *this;
}

AudioBuffer& AudioBuffer::operator-=(const AudioBuffer& other) {
  require_same_length(*this, other, "subtract");
  for (std::size_t c = 0; c < kChannels; ++c) {
    auto& dst = channels_[c];
    const auto& src = other.channels_[c];
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
  }
  return *this;
}

AudioBuffer& AudioBuffer::operator*=(double gain) {
  for (auto& ch : channels_) {
    for (double& v : ch) v *= gain;
  }
  return *this;
}

void require_finite(const AudioBuffer& buffer, std::string_view what) {
  if (!buffer.all_finite()) {
    fail(Errc::kInvalidAudio, std::string(what) + ": buffer contains non-finite samples");
  }
}

void require_same_length(const AudioBuffer& a, const AudioBuffer& b, std::string_view what) {
  if (a.frames() != b.frames()) {
    fail(Errc::kLengthMismatch, std::string(what) + ": length mismatch (" +
                                    std::to_string(a.frames()) + " vs " +
                                    std::to_string(b.frames()) + " frames)");
  }
}

double max_abs_diff(const AudioBuffer& a, const AudioBuffer& b) {
  require_same_length(a, b, "max_abs_diff");
  double m = 0.0;
  for (int c = 0; c < kChannels; ++c) {
    const auto x = a.channel(c);
    const auto y = b.channel(c);
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  }
  return m;
}

double db_to_amplitude(double gain_db) { return std::pow(10.0, gain_db / 20.0); }

double amplitude_to_db(double amplitude) { return 20.0 * std::log10(amplitude); }

double power_ratio_db(double numerator, double denominator) {
  return 10.0 * std::log10(numerator / denominator);
}

AudioBuffer apply_gain_db(const AudioBuffer& buffer, double gain_db) {
  if (!std::isfinite(gain_db)) fail(Errc::kInvalidArgument, "apply_gain_db: gain must be finite");
  return buffer * db_to_amplitude(gain_db);
}

}  // namespace sdx
