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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdx/robust.hpp"
#include "sdx/separation.hpp"

namespace sdx {

inline constexpr FrameSpec kToyFrames{512, 256, WindowKind::kHann};

// One non-negative spectral mask per class over the STFT bins, applied to
// both channels of every frame.
class ToyMaskModel final : public Separator {
 public:
  explicit ToyMaskModel(FrameSpec frames = kToyFrames, double init = 1.0 / kNumClasses);

  std::string name() const override { return "toy-mask"; }
  const FrameSpec& frames() const { return frames_; }
  std::size_t bins() const { return frames_.frame_len / 2 + 1; }

  std::vector<double>& mask(SourceClass c) { return masks_[index_of(c)]; }
  const std::vector<double>& mask(SourceClass c) const { return masks_[index_of(c)]; }

  bool operator==(const ToyMaskModel& other) const {
    return frames_ == other.frames_ && masks_ == other.masks_;
  }

  nlohmann::json to_json() const;
  static ToyMaskModel from_json(const nlohmann::json& doc);

 protected:
  Stems run(const AudioBuffer& mixture, std::ptrdiff_t offset) const override;

 private:
  FrameSpec frames_;
  std::array<std::vector<double>, kNumClasses> masks_;
};

struct ToyTrainConfig {
  int steps = 300;  // at most 1e5
  std::size_t batch = 8;
  double learning_rate = 0.2;
  int eval_every = 10;
  std::optional<TruncationPolicy> truncation;
  FrameSpec frames = kToyFrames;
  std::uint64_t seed = 0;
};

struct ToyTrainResult {
  ToyMaskModel model;
  std::vector<double> train_loss;       // per step, mean over the whole batch
  std::vector<double> validation_loss;  // at step 0 and every eval_every steps
  std::vector<int> validation_steps;

  nlohmann::json curves() const;
};

// Precomputed magnitude spectrograms of one song, normalized by the mean
// mixture magnitude.
struct ToyExample {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<float> mixture;                         // [ch][frame][bin]
  std::array<std::vector<float>, kNumClasses> target;  // same layout
};

ToyExample make_toy_example(const Song& song, const FrameSpec& frames);

// Mean absolute spectral error of the model on one example, per frame.
std::vector<double> toy_frame_losses(const ToyMaskModel& model, const ToyExample& ex);
double toy_loss(const ToyMaskModel& model, std::span<const ToyExample> examples);

// Projected subgradient descent on the L1 magnitude loss. Throws Divergence
// if the loss becomes non-finite.
ToyTrainResult train_toy_mask_model(std::span<const Song> train, std::span<const Song> validation,
                                    const ToyTrainConfig& config);

// --- synthetic corpus ----------------------------------------------------------

struct ToyCorpusConfig {
  std::size_t songs = 40;
  double seconds = 0.5;
  int partials = 12;
  double gain_spread_db = 6.0;
  // Fraction of songs with two class stems swapped.
  double corrupt_rate = 0.0;
};

struct ToyCorpus {
  std::vector<Song> songs;        // possibly corrupted
  std::vector<Song> clean;        // ground truth
  std::vector<bool> corrupted;
};

// Classes draw partial frequencies from overlapping log-normal spectra.
ToyCorpus make_toy_corpus(const ToyCorpusConfig& config, std::uint64_t seed);

}  // namespace sdx
