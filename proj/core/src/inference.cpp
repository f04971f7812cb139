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

#include <algorithm>
#include <cmath>

#include "sdx/error.hpp"
#include "sdx/parallel.hpp"
#include "sdx/rng.hpp"
#include "sdx/separation.hpp"

namespace sdx {

void validate(const InferenceAugmentation& aug) {
  if (aug.n_shifts < 1) fail(Errc::kInvalidArgument, "n_shifts must be at least 1");
  if (!(aug.overlap_ratio >= 0.0 && aug.overlap_ratio < 1.0)) {
    fail(Errc::kInvalidArgument, "overlap_ratio must lie in [0, 1)");
  }
}

AudioBuffer residual(const AudioBuffer& mixture, const AudioBuffer& estimate) {
  require_same_length(mixture, estimate, "residual");
  return mixture - estimate;
}

Stems infer_overlapped(const Separator& sep, const AudioBuffer& mixture, std::size_t window_len,
                       double overlap_ratio, int jobs, std::ptrdiff_t offset) {
  if (!(overlap_ratio >= 0.0 && overlap_ratio < 1.0)) {
    fail(Errc::kInvalidArgument, "overlap_ratio must lie in [0, 1)");
  }
  const auto hop = static_cast<std::size_t>(std::floor(static_cast<double>(window_len) * (1.0 - overlap_ratio)));
  if (window_len < 2 || hop == 0) {
    fail(Errc::kWindowTooShort, "window of " + std::to_string(window_len) + " samples leaves no hop at overlap " +
                                    std::to_string(overlap_ratio));
  }
  const std::size_t n = mixture.frames();
  const std::size_t fade = window_len - hop;

  std::vector<std::size_t> starts;
  for (std::size_t s = 0;; s += hop) {
    starts.push_back(s);
    if (s + window_len >= n) break;
  }

  std::vector<Stems> parts(starts.size());
  parallel_for(starts.size(), sep.concurrent() ? jobs : 1, [&](std::size_t k) {
    const auto start = static_cast<std::ptrdiff_t>(starts[k]);
    parts[k] = sep.separate(mixture.slice(start, window_len), offset + start);
  });

  // Trapezoid weights: linear ramps of `fade` samples at both ends, strictly
  // positive.
  std::vector<double> weight(window_len, 1.0);
  if (fade > 0) {
    const double denom = static_cast<double>(fade + 1);
    for (std::size_t i = 0; i < window_len; ++i) {
      const double up = static_cast<double>(i + 1) / denom;
      const double down = static_cast<double>(window_len - i) / denom;
      weight[i] = std::min({1.0, up, down});
    }
  }

  Stems out = Stems::silent(n);
  std::vector<double> norm(n, 0.0);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const std::size_t start = starts[k];
    const std::size_t len = std::min(window_len, n - std::min(n, start));
    for (std::size_t i = 0; i < len; ++i) norm[start + i] += weight[i];
    for (SourceClass c : kAllClasses) {
      for (int ch = 0; ch < kChannels; ++ch) {
        auto dst = out[c].channel(ch);
        const auto src = parts[k][c].channel(ch);
        for (std::size_t i = 0; i < len; ++i) dst[start + i] += weight[i] * src[i];
      }
    }
  }
  if (fade > 0) {
    for (SourceClass c : kAllClasses) {
      for (int ch = 0; ch < kChannels; ++ch) {
        auto dst = out[c].channel(ch);
        for (std::size_t i = 0; i < n; ++i) dst[i] /= norm[i];
      }
    }
  }
  return out;
}

Stems infer_shifted(const Separator& sep, const AudioBuffer& mixture, int n_shifts, std::size_t max_shift,
                    std::uint64_t seed, std::ptrdiff_t offset) {
  if (n_shifts < 1) fail(Errc::kInvalidArgument, "n_shifts must be at least 1");
  Rng rng(seed);
  const std::size_t n = mixture.frames();
  Stems acc = Stems::silent(n);
  for (int k = 0; k < n_shifts; ++k) {
    const auto shift = static_cast<std::ptrdiff_t>(rng.uniform_int(0, static_cast<std::int64_t>(max_shift)));
    // Delay by `shift`: the shifted buffer starts `shift` samples before the input.
    const AudioBuffer shifted = mixture.slice(-shift, n + static_cast<std::size_t>(shift));
    const Stems est = sep.separate(shifted, offset - shift);
    for (SourceClass c : kAllClasses) acc[c] += est[c].slice(shift, n);
  }
  if (n_shifts > 1) {
    for (auto& b : acc.by_class) b *= 1.0 / n_shifts;
  }
  return acc;
}

Stems infer_phase_inverted(const Separator& sep, const AudioBuffer& mixture, std::ptrdiff_t offset) {
  Stems direct = sep.separate(mixture, offset);
  const Stems inverted = sep.separate(-mixture, offset);
  for (SourceClass c : kAllClasses) {
    direct[c] -= inverted[c];
    direct[c] *= 0.5;
  }
  return direct;
}

Stems infer_augmented(const Separator& sep, const AudioBuffer& mixture, const InferenceAugmentation& aug,
                      std::uint64_t seed, int jobs) {
  validate(aug);
  FunctionSeparator windowed("augmented", [&](const AudioBuffer& x, std::ptrdiff_t offset) {
    auto base = [&](const AudioBuffer& y, std::ptrdiff_t off) {
      if (aug.window_len == 0) return sep.separate(y, off);
      return infer_overlapped(sep, y, aug.window_len, aug.overlap_ratio, jobs, off);
    };
    if (!aug.phase_invert) return base(x, offset);
    FunctionSeparator inner("windowed", base, sep.concurrent());
    return infer_phase_inverted(inner, x, offset);
  }, sep.concurrent());
  const std::size_t max_shift = aug.n_shifts > 1 ? aug.max_shift : 0;
  return infer_shifted(windowed, mixture, aug.n_shifts, max_shift, seed);
}

BlendWeights BlendWeights::uniform(std::vector<std::string> models) {
  BlendWeights w;
  const double each = models.empty() ? 0.0 : 1.0 / static_cast<double>(models.size());
  for (auto& row : w.weights) row.assign(models.size(), each);
  w.models = std::move(models);
  return w;
}

void BlendWeights::validate() const {
  if (models.empty()) fail(Errc::kWeightMismatch, "blend weights name no models");
  for (SourceClass c : kAllClasses) {
    const auto& row = weights[index_of(c)];
    if (row.size() != models.size()) {
      fail(Errc::kWeightMismatch, "blend weights for '" + std::string(to_string(c)) + "' have " +
                                      std::to_string(row.size()) + " entries for " +
                                      std::to_string(models.size()) + " models");
    }
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) fail(Errc::kWeightMismatch, "blend weights must be finite and >= 0");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      fail(Errc::kWeightMismatch, "blend weights for '" + std::string(to_string(c)) + "' sum to " + std::to_string(sum));
    }
  }
}

Stems blend(std::span<const Stems> estimates, const BlendWeights& weights) {
  weights.validate();
  if (estimates.size() != weights.models.size()) {
    fail(Errc::kWeightMismatch, std::to_string(estimates.size()) + " estimate sets for " +
                                    std::to_string(weights.models.size()) + " weighted models");
  }
  const std::size_t n = estimates.front().frames();
  for (const auto& e : estimates) {
    for (SourceClass c : kAllClasses) {
      if (e[c].frames() != n) fail(Errc::kLengthMismatch, "blend: estimate sets differ in length");
    }
  }
  Stems out = Stems::silent(n);
  for (SourceClass c : kAllClasses) {
    const auto& row = weights.weights[index_of(c)];
    for (std::size_t m = 0; m < estimates.size(); ++m) {
      if (row[m] == 0.0) continue;
      out[c] += estimates[m][c] * row[m];
    }
  }
  return out;
}

Stems two_stage_instrumental(const Separator& vocal_sep, const Separator& rest_sep, const AudioBuffer& mixture,
                             std::ptrdiff_t offset) {
  const AudioBuffer vocals = vocal_sep.separate(mixture, offset)[SourceClass::kVocals];
  const AudioBuffer instrumental = residual(mixture, vocals);
  Stems out = rest_sep.separate(instrumental, offset);
  out[SourceClass::kVocals] = vocals;
  return out;
}

}  // namespace sdx
