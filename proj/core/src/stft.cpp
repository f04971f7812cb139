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

#include "sdx/stft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>

#include "sdx/error.hpp"

namespace sdx {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
  };

  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  Plans get(std::size_t n) {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(n); it != plans_.end()) return it->second;
    std::vector<double> real(n);
    std::vector<std::complex<double>> spec(n / 2 + 1);
    auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
    const int len = static_cast<int>(n);
    Plans p;
    p.forward = fftw_plan_dft_r2c_1d(len, real.data(), cplx, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.inverse = fftw_plan_dft_c2r_1d(len, cplx, real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(n, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.inverse);
    }
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, Plans> plans_;
};

double cola_gain(const FrameSpec& spec, std::span<const double> window) {
  return std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(spec.hop_len);
}

}  // namespace

std::vector<double> make_window(const FrameSpec& spec) {
  std::vector<double> w(spec.frame_len, 1.0);
  if (spec.window == WindowKind::kHann) {
    const double n = static_cast<double>(spec.frame_len);
    for (std::size_t i = 0; i < spec.frame_len; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
    }
  }
  return w;
}

bool is_cola(const FrameSpec& spec) {
  if (spec.frame_len == 0 || spec.hop_len == 0 || spec.hop_len > spec.frame_len) return false;
  const auto w = make_window(spec);
  std::vector<double> sums(spec.hop_len, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) sums[i % spec.hop_len] += w[i];
  const auto [lo, hi] = std::minmax_element(sums.begin(), sums.end());
  return *lo > 0.0 && (*hi - *lo) <= 1e-9 * *hi;
}

void validate(const FrameSpec& spec) {
  if (spec.frame_len < 2 || spec.hop_len == 0 || spec.hop_len > spec.frame_len) {
    fail(Errc::kInvalidArgument, "frame spec requires 0 < hop_len <= frame_len and frame_len >= 2");
  }
  if (!is_cola(spec)) {
    fail(Errc::kNonColaSpec, "window/hop pair (" + std::to_string(spec.frame_len) + ", " +
                                 std::to_string(spec.hop_len) + ") violates constant overlap-add");
  }
}

std::size_t stft_padding(const FrameSpec& spec) { return spec.frame_len - spec.hop_len; }

Spectrogram stft(const AudioBuffer& buffer, const FrameSpec& spec) {
  validate(spec);
  const std::size_t pad = stft_padding(spec);
  const std::size_t n = spec.frame_len;
  const std::size_t hop = spec.hop_len;

  std::size_t padded = pad + buffer.frames() + n;
  if ((padded - n) % hop != 0) padded += hop - (padded - n) % hop;

  Spectrogram out;
  out.spec = spec;
  out.length = buffer.frames();
  out.num_frames = (padded - n) / hop + 1;
  out.bins = n / 2 + 1;

  const auto window = make_window(spec);
  const auto plans = PlanCache::instance().get(n);
  std::vector<double> frame(n);
  for (int c = 0; c < kChannels; ++c) {
    auto& dst = out.data[static_cast<std::size_t>(c)];
    dst.assign(out.num_frames * out.bins, {});
    const auto x = buffer.channel(c);
    for (std::size_t f = 0; f < out.num_frames; ++f) {
      // Frame f starts at padded position f*hop, i.e. signal index f*hop - pad.
      const auto start = static_cast<std::ptrdiff_t>(f * hop) - static_cast<std::ptrdiff_t>(pad);
      for (std::size_t i = 0; i < n; ++i) {
        const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(i);
        const double v = (idx >= 0 && idx < static_cast<std::ptrdiff_t>(x.size()))
                             ? x[static_cast<std::size_t>(idx)]
                             : 0.0;
        frame[i] = v * window[i];
      }
      fftw_execute_dft_r2c(plans.forward, frame.data(),
                           reinterpret_cast<fftw_complex*>(dst.data() + f * out.bins));
    }
  }
  return out;
}

AudioBuffer istft(const Spectrogram& spectrogram) {
  const FrameSpec& spec = spectrogram.spec;
  validate(spec);
  const std::size_t n = spec.frame_len;
  const std::size_t hop = spec.hop_len;
  const std::size_t pad = stft_padding(spec);
  if (spectrogram.bins != n / 2 + 1) fail(Errc::kInvalidArgument, "istft: bin count does not match frame length");

  const auto window = make_window(spec);
  // Frame outputs of the inverse FFT are scaled by n; fold that into the gain.
  const double scale = 1.0 / (static_cast<double>(n) * cola_gain(spec, window));
  const auto plans = PlanCache::instance().get(n);

  AudioBuffer out(spectrogram.length);
  std::vector<std::complex<double>> bins(spectrogram.bins);
  std::vector<double> frame(n);
  for (int c = 0; c < kChannels; ++c) {
    const auto& src = spectrogram.data[static_cast<std::size_t>(c)];
    auto y = out.channel(c);
    for (std::size_t f = 0; f < spectrogram.num_frames; ++f) {
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(f * spectrogram.bins), spectrogram.bins, bins.begin());
      fftw_execute_dft_c2r(plans.inverse, reinterpret_cast<fftw_complex*>(bins.data()), frame.data());
      const auto start = static_cast<std::ptrdiff_t>(f * hop) - static_cast<std::ptrdiff_t>(pad);
      for (std::size_t i = 0; i < n; ++i) {
        const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(i);
        if (idx >= 0 && idx < static_cast<std::ptrdiff_t>(y.size())) {
          y[static_cast<std::size_t>(idx)] += frame[i] * scale;
        }
      }
    }
  }
  return out;
}

}  // namespace sdx
