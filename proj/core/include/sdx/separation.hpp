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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "sdx/dataset.hpp"
#include "sdx/stft.hpp"

namespace sdx {

// A music source separator: mixture in, one estimate per class out.
//
// `offset` is the position of mixture[0] on the song timeline. Inference
// wrappers that cut or shift the input pass it along, which lets song-bound
// separators (the oracle) line up with their references. Trained models
// ignore it.
class Separator {
 public:
  virtual ~Separator() = default;

  // Validates that every estimate matches the input length.
  Stems separate(const AudioBuffer& mixture, std::ptrdiff_t offset = 0) const;

  // False if the implementation must not be called from several threads at
  // once; wrappers then run it serially.
  virtual bool concurrent() const { return true; }
  virtual std::string name() const = 0;

 protected:
  virtual Stems run(const AudioBuffer& mixture, std::ptrdiff_t offset) const = 0;
};

using SeparatorPtr = std::shared_ptr<const Separator>;

// Default framing for mask-based separators.
inline constexpr FrameSpec kMaskFrames{4096, 1024, WindowKind::kHann};

// Ideal ratio mask |S_c| / sum_k |S_k| per channel and time-frequency bin,
// computed from the clean stems of one song and applied to the input STFT.
// Bins where every reference is silent get 1/4 per class, so the masks
// always sum to one.
class OracleIrm final : public Separator {
 public:
  explicit OracleIrm(Stems clean, FrameSpec frames = kMaskFrames);

  std::string name() const override { return "oracle-irm"; }
  const FrameSpec& frames() const { return frames_; }

 protected:
  Stems run(const AudioBuffer& mixture, std::ptrdiff_t offset) const override;

 private:
  Stems clean_;
  FrameSpec frames_;
  // Whole-song reference spectrograms, computed on first aligned call.
  mutable std::once_flag refs_once_;
  mutable std::array<Spectrogram, kNumClasses> full_refs_;
};

SeparatorPtr oracle_irm(Stems clean, FrameSpec frames = kMaskFrames);

// Routes the whole mixture to one class.
class Passthrough final : public Separator {
 public:
  explicit Passthrough(SourceClass target) : target_(target) {}
  std::string name() const override;

 protected:
  Stems run(const AudioBuffer& mixture, std::ptrdiff_t offset) const override;

 private:
  SourceClass target_;
};

SeparatorPtr passthrough(SourceClass target);

// Returns fixed, pre-computed estimates cut at the requested offset,
// regardless of the input content.
class FixedSeparator final : public Separator {
 public:
  explicit FixedSeparator(Stems estimates, std::string name = "fixed")
      : estimates_(std::move(estimates)), name_(std::move(name)) {}
  std::string name() const override { return name_; }

 protected:
  Stems run(const AudioBuffer& mixture, std::ptrdiff_t offset) const override;

 private:
  Stems estimates_;
  std::string name_;
};

class FunctionSeparator final : public Separator {
 public:
  using Fn = std::function<Stems(const AudioBuffer&, std::ptrdiff_t)>;
  FunctionSeparator(std::string name, Fn fn, bool concurrent = true)
      : name_(std::move(name)), fn_(std::move(fn)), concurrent_(concurrent) {}
  std::string name() const override { return name_; }
  bool concurrent() const override { return concurrent_; }

 protected:
  Stems run(const AudioBuffer& mixture, std::ptrdiff_t offset) const override { return fn_(mixture, offset); }

 private:
  std::string name_;
  Fn fn_;
  bool concurrent_;
};

// Runs a shell command per call. Protocol: a fresh directory holds
// mixture.wav (stereo float32, 44.1 kHz); the command must write bass.wav,
// drums.wav, other.wav and vocals.wav of the same length into the output
// directory and exit with status 0.
//
// The template may reference {input} (path of mixture.wav) and {output}
// (output directory). Calls are serialized per instance.
class ExternalSeparator final : public Separator {
 public:
  ExternalSeparator(std::string command_template, std::filesystem::path workdir);
  std::string name() const override { return "external"; }
  bool concurrent() const override { return false; }

 protected:
  Stems run(const AudioBuffer& mixture, std::ptrdiff_t offset) const override;

 private:
  std::string command_template_;
  std::filesystem::path workdir_;
  mutable std::mutex mutex_;
  mutable std::uint64_t calls_ = 0;
};

SeparatorPtr external_separator(std::string command_template, std::filesystem::path workdir);

// --- inference-time ensembling ----------------------------------------------

struct InferenceAugmentation {
  int n_shifts = 1;
  std::size_t max_shift = kSampleRate / 2;
  double overlap_ratio = 0.0;
  std::size_t window_len = 0;  // 0: whole-signal inference
  bool phase_invert = false;
};

void validate(const InferenceAugmentation& aug);

// Sample-wise mixture - estimate.
AudioBuffer residual(const AudioBuffer& mixture, const AudioBuffer& estimate);

// Separates overlapping windows of `window_len` samples (hop =
// window_len * (1 - overlap_ratio)) and merges them with linear cross-fades,
// normalized by the summed fade weights. With overlap 0 the windows tile the
// input exactly. Throws WindowTooShort.
Stems infer_overlapped(const Separator& sep, const AudioBuffer& mixture, std::size_t window_len,
                       double overlap_ratio, int jobs = 1, std::ptrdiff_t offset = 0);

// Averages n_shifts runs, each on the input delayed by a uniform random
// integer shift in [0, max_shift] samples and re-aligned afterwards.
Stems infer_shifted(const Separator& sep, const AudioBuffer& mixture, int n_shifts, std::size_t max_shift,
                    std::uint64_t seed, std::ptrdiff_t offset = 0);

// (sep(x) - sep(-x)) / 2.
Stems infer_phase_inverted(const Separator& sep, const AudioBuffer& mixture, std::ptrdiff_t offset = 0);

// Shifts outermost, then phase inversion, then windowing.
Stems infer_augmented(const Separator& sep, const AudioBuffer& mixture, const InferenceAugmentation& aug,
                      std::uint64_t seed, int jobs = 1);

// Per-source ensemble weights, weights[class][model]; each row sums to one.
struct BlendWeights {
  std::vector<std::string> models;
  std::array<std::vector<double>, kNumClasses> weights;

  static BlendWeights uniform(std::vector<std::string> models);
  // Throws WeightMismatch.
  void validate() const;
};

// Per-source weighted sum of the estimate sets (in `weights.models` order).
Stems blend(std::span<const Stems> estimates, const BlendWeights& weights);

// vocals from the first separator; the other three classes from running the
// second separator on mixture - vocals.
Stems two_stage_instrumental(const Separator& vocal_sep, const Separator& rest_sep, const AudioBuffer& mixture,
                             std::ptrdiff_t offset = 0);

}  // namespace sdx
