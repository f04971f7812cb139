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

#include "sdx/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "sdx/error.hpp"
#include "sdx/rng.hpp"

namespace sdx {

ToyMaskModel::ToyMaskModel(FrameSpec frames, double init) : frames_(frames) {
  validate(frames_);
  for (auto& m : masks_) m.assign(bins(), std::clamp(init, 0.0, 1.0));
}

Stems ToyMaskModel::run(const AudioBuffer& mixture, std::ptrdiff_t) const {
  const Spectrogram mix = stft(mixture, frames_);
  Stems out;
  for (SourceClass c : kAllClasses) {
    Spectrogram s = mix;
    const auto& m = masks_[index_of(c)];
    for (int ch = 0; ch < kChannels; ++ch) {
      for (std::size_t f = 0; f < s.num_frames; ++f) {
        for (std::size_t k = 0; k < s.bins; ++k) s.at(ch, f, k) *= m[k];
      }
    }
    out[c] = istft(s);
  }
  return out;
}

nlohmann::json ToyMaskModel::to_json() const {
  nlohmann::json masks = nlohmann::json::object();
  for (SourceClass c : kAllClasses) masks[std::string(to_string(c))] = masks_[index_of(c)];
  return {{"frame_len", frames_.frame_len}, {"hop_len", frames_.hop_len}, {"masks", masks}};
}

ToyMaskModel ToyMaskModel::from_json(const nlohmann::json& doc) {
  try {
    FrameSpec frames{doc.at("frame_len").get<std::size_t>(), doc.at("hop_len").get<std::size_t>(),
                     WindowKind::kHann};
    ToyMaskModel model(frames);
    for (SourceClass c : kAllClasses) {
      auto m = doc.at("masks").at(std::string(to_string(c))).get<std::vector<double>>();
      if (m.size() != model.bins()) fail(Errc::kSchemaError, "toy model mask has the wrong number of bins");
      for (double v : m) {
        if (!(v >= 0.0 && v <= 1.0)) fail(Errc::kSchemaError, "toy model mask value outside [0, 1]");
      }
      model.mask(c) = std::move(m);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kSchemaError, std::string("toy model: ") + e.what());
  }
}

nlohmann::json ToyTrainResult::curves() const {
  return {{"train_loss", train_loss}, {"validation_loss", validation_loss}, {"validation_steps", validation_steps}};
}

ToyExample make_toy_example(const Song& song, const FrameSpec& frames) {
  const Spectrogram mix = stft(song.mix(), frames);
  ToyExample ex;
  ex.frames = mix.num_frames;
  ex.bins = mix.bins;
  const std::size_t plane = ex.frames * ex.bins;
  ex.mixture.resize(kChannels * plane);
  double total = 0.0;
  for (int ch = 0; ch < kChannels; ++ch) {
    for (std::size_t k = 0; k < plane; ++k) {
      const double v = std::abs(mix.data[static_cast<std::size_t>(ch)][k]);
      total += v;
      ex.mixture[static_cast<std::size_t>(ch) * plane + k] = static_cast<float>(v);
    }
  }
  const double scale = total > 0.0 ? static_cast<double>(ex.mixture.size()) / total : 1.0;
  for (auto& v : ex.mixture) v = static_cast<float>(v * scale);
  for (SourceClass c : kAllClasses) {
    const Spectrogram s = stft(song.stems[c], frames);
    auto& dst = ex.target[index_of(c)];
    dst.resize(kChannels * plane);
    for (int ch = 0; ch < kChannels; ++ch) {
      for (std::size_t k = 0; k < plane; ++k) {
        dst[static_cast<std::size_t>(ch) * plane + k] =
            static_cast<float>(std::abs(s.data[static_cast<std::size_t>(ch)][k]) * scale);
      }
    }
  }
  return ex;
}

namespace {

// Per-frame L1 loss; when `grad` is given, adds weight * d(loss_t)/d(mask)
// for frames with a non-zero weight.
void frame_losses(const ToyMaskModel& model, const ToyExample& ex, std::vector<double>& losses,
                  std::array<std::vector<double>, kNumClasses>* grad, std::span<const double> weights) {
  const std::size_t plane = ex.frames * ex.bins;
  const double norm = 1.0 / static_cast<double>(kChannels * kNumClasses * ex.bins);
  losses.assign(ex.frames, 0.0);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto& m = model.mask(kAllClasses[c]);
    for (int ch = 0; ch < kChannels; ++ch) {
      const std::size_t base = static_cast<std::size_t>(ch) * plane;
      for (std::size_t t = 0; t < ex.frames; ++t) {
        const float* x = &ex.mixture[base + t * ex.bins];
        const float* s = &ex.target[c][base + t * ex.bins];
        double acc = 0.0;
        const double w = grad ? weights[t] * norm : 0.0;
        for (std::size_t k = 0; k < ex.bins; ++k) {
          const double r = m[k] * x[k] - s[k];
          acc += std::abs(r);
          if (w != 0.0) (*grad)[c][k] += w * (r > 0.0 ? x[k] : (r < 0.0 ? -x[k] : 0.0));
        }
        losses[t] += acc * norm;
      }
    }
  }
}

}  // namespace

std::vector<double> toy_frame_losses(const ToyMaskModel& model, const ToyExample& ex) {
  std::vector<double> losses;
  frame_losses(model, ex, losses, nullptr, {});
  return losses;
}

double toy_loss(const ToyMaskModel& model, std::span<const ToyExample> examples) {
  if (examples.empty()) fail(Errc::kEmptyInput, "toy loss over no examples");
  double total = 0.0;
  for (const auto& ex : examples) {
    const auto l = toy_frame_losses(model, ex);
    total += std::accumulate(l.begin(), l.end(), 0.0) / static_cast<double>(l.size());
  }
  return total / static_cast<double>(examples.size());
}

ToyTrainResult train_toy_mask_model(std::span<const Song> train, std::span<const Song> validation,
                                    const ToyTrainConfig& config) {
  if (config.steps < 0 || config.steps > 100000) fail(Errc::kInvalidArgument, "steps must lie in [0, 100000]");
  if (config.batch == 0) fail(Errc::kInvalidArgument, "batch size must be positive");
  if (!(config.learning_rate > 0.0)) fail(Errc::kInvalidArgument, "learning rate must be positive");
  if (config.eval_every < 1) fail(Errc::kInvalidArgument, "eval_every must be positive");
  if (train.empty()) fail(Errc::kEmptyInput, "no training songs");
  if (config.truncation) validate(*config.truncation);

  std::vector<ToyExample> train_ex;
  train_ex.reserve(train.size());
  for (const Song& s : train) train_ex.push_back(make_toy_example(s, config.frames));
  std::vector<ToyExample> val_ex;
  val_ex.reserve(validation.size());
  for (const Song& s : validation) val_ex.push_back(make_toy_example(s, config.frames));

  ToyTrainResult result{ToyMaskModel(config.frames), {}, {}, {}};
  ToyMaskModel& model = result.model;
  auto evaluate = [&](int step) {
    if (val_ex.empty()) return;
    const double v = toy_loss(model, val_ex);
    if (!std::isfinite(v)) fail(Errc::kDivergence, "validation loss is not finite at step " + std::to_string(step));
    result.validation_loss.push_back(v);
    result.validation_steps.push_back(step);
  };
  evaluate(0);

  Rng rng(config.seed);
  std::vector<std::size_t> order(train_ex.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  const std::size_t batch = std::min(config.batch, train_ex.size());
  const std::size_t bins = model.bins();

  std::vector<std::size_t> picked(batch);
  std::vector<std::vector<double>> losses(batch);
  std::array<std::vector<double>, kNumClasses> grad;
  for (int step = 0; step < config.steps; ++step) {
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        rng.shuffle(std::span(order));
        cursor = 0;
      }
      picked[b] = order[cursor++];
    }
    const std::size_t frames = train_ex[picked[0]].frames;
    bool uniform = true;
    for (std::size_t b = 0; b < batch; ++b) {
      frame_losses(model, train_ex[picked[b]], losses[b], nullptr, {});
      uniform = uniform && losses[b].size() == frames;
    }
    if (!uniform) fail(Errc::kLengthMismatch, "toy training songs must share one length");

    LossTable table{batch, frames, {}};
    table.values.reserve(batch * frames);
    double total = 0.0;
    for (const auto& l : losses) {
      for (double v : l) {
        if (!std::isfinite(v)) fail(Errc::kDivergence, "training loss is not finite at step " + std::to_string(step));
        total += v;
        table.values.push_back(v);
      }
    }
    result.train_loss.push_back(total / static_cast<double>(table.values.size()));

    std::vector<std::uint8_t> keep(table.values.size(), 1);
    if (config.truncation) keep = truncate_losses(table, *config.truncation, step);
    const auto kept = static_cast<double>(std::count(keep.begin(), keep.end(), std::uint8_t{1}));

    for (auto& g : grad) g.assign(bins, 0.0);
    std::vector<double> weights(frames);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t t = 0; t < frames; ++t) weights[t] = keep[b * frames + t] ? 1.0 / kept : 0.0;
      frame_losses(model, train_ex[picked[b]], losses[b], &grad, weights);
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      auto& m = model.mask(kAllClasses[c]);
      for (std::size_t k = 0; k < bins; ++k) {
        const double next = m[k] - config.learning_rate * grad[c][k];
        if (!std::isfinite(next)) fail(Errc::kDivergence, "mask update is not finite at step " + std::to_string(step));
        m[k] = std::clamp(next, 0.0, 1.0);
      }
    }
    if ((step + 1) % config.eval_every == 0 || step + 1 == config.steps) evaluate(step + 1);
  }
  return result;
}

// --- corpus --------------------------------------------------------------------

namespace {

constexpr std::array<double, kNumClasses> kToyCenterHz{900.0, 250.0, 3000.0, 1500.0};  // v, b, d, o
constexpr double kToySpreadOctaves = 1.0;

AudioBuffer toy_source(SourceClass c, std::size_t n, int partials, double gain, Rng& rng) {
  AudioBuffer out(n);
  const double center = std::log2(kToyCenterHz[index_of(c)]);
  for (int p = 0; p < partials; ++p) {
    // Box-Muller normal deviate for the log-frequency.
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    const double hz = std::clamp(std::exp2(center + kToySpreadOctaves * z), 40.0, 16000.0);
    const double amp = gain * rng.uniform(0.5, 1.0) / partials;
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double pan = rng.uniform(0.2, 0.8);
    // Rotating phasor instead of sin() per sample.
    const double w = 2.0 * std::numbers::pi * hz / kSampleRate;
    const std::complex<double> step(std::cos(w), std::sin(w));
    std::complex<double> z_t = std::polar(1.0, phase);
    auto left = out.channel(0);
    auto right = out.channel(1);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = amp * z_t.imag();
      left[i] += v * (1.0 - pan);
      right[i] += v * pan;
      z_t *= step;
    }
  }
  return out;
}

}  // namespace

ToyCorpus make_toy_corpus(const ToyCorpusConfig& config, std::uint64_t seed) {
  if (config.songs == 0) fail(Errc::kInvalidArgument, "toy corpus needs at least one song");
  if (!(config.seconds > 0.0)) fail(Errc::kInvalidArgument, "toy corpus songs need a positive duration");
  if (config.partials < 1) fail(Errc::kInvalidArgument, "toy corpus needs at least one partial");
  if (!(config.corrupt_rate >= 0.0 && config.corrupt_rate <= 1.0)) {
    fail(Errc::kInvalidArgument, "corrupt_rate must lie in [0, 1]");
  }
  const auto n = static_cast<std::size_t>(std::lround(config.seconds * kSampleRate));
  ToyCorpus corpus;
  for (std::size_t i = 0; i < config.songs; ++i) {
    Rng rng(derive_seed(seed, i));
    char id[32];
    std::snprintf(id, sizeof id, "toy%03zu", i);
    Song song{id, {}, std::nullopt};
    for (SourceClass c : kAllClasses) {
      const double gain = db_to_amplitude(rng.uniform_closed(-config.gain_spread_db, config.gain_spread_db)) * 0.1;
      song.stems[c] = toy_source(c, n, config.partials, gain, rng);
    }
    corpus.clean.push_back(song);
    const bool corrupt = rng.bernoulli(config.corrupt_rate);
    if (corrupt) {
      const auto a = static_cast<std::size_t>(rng.uniform_int(0, kNumClasses - 1));
      auto b = static_cast<std::size_t>(rng.uniform_int(0, kNumClasses - 2));
      if (b >= a) ++b;
      std::swap(song.stems.by_class[a], song.stems.by_class[b]);
    }
    corpus.corrupted.push_back(corrupt);
    corpus.songs.push_back(std::move(song));
  }
  return corpus;
}

}  // namespace sdx
