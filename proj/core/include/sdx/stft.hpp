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
#include <cstddef>
#include <span>
#include <vector>

#include "sdx/audio.hpp"

namespace sdx {

enum class WindowKind { kHann, kRectangular };

struct FrameSpec {
  std::size_t frame_len = 2048;
  std::size_t hop_len = 512;
  WindowKind window = WindowKind::kHann;

  bool operator==(const FrameSpec&) const = default;
};

// Periodic analysis window of length frame_len.
std::vector<double> make_window(const FrameSpec& spec);

// True if shifted copies of the window at multiples of hop_len sum to a
// constant (constant overlap-add).
bool is_cola(const FrameSpec& spec);

// Throws NonColaSpec (or InvalidArgument for degenerate sizes).
void validate(const FrameSpec& spec);

// One-sided complex spectrogram, both channels, frame-major.
struct Spectrogram {
  FrameSpec spec;
  std::size_t length = 0;  // samples of the analysed signal
  std::size_t num_frames = 0;
  std::size_t bins = 0;    // frame_len / 2 + 1
  std::array<std::vector<std::complex<double>>, kChannels> data;

  std::complex<double>& at(int c, std::size_t frame, std::size_t bin) {
    return data[static_cast<std::size_t>(c)][frame * bins + bin];
  }
  const std::complex<double>& at(int c, std::size_t frame, std::size_t bin) const {
    return data[static_cast<std::size_t>(c)][frame * bins + bin];
  }
};

// The signal is zero-padded by frame_len - hop_len in front and by at least
// frame_len at the end, so every input sample is covered by the same number
// of frames. istft trims the padding and reconstructs the input exactly up to
// rounding.
Spectrogram stft(const AudioBuffer& buffer, const FrameSpec& spec);
AudioBuffer istft(const Spectrogram& spectrogram);

// Number of leading zeros stft inserts before the first sample.
std::size_t stft_padding(const FrameSpec& spec);

}  // namespace sdx
