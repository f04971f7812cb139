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

#include "sdx/separation.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>

#include "sdx/error.hpp"
#include "sdx/manifest.hpp"
#include "sdx/wav.hpp"

namespace sdx {
namespace fs = std::filesystem;

Stems Separator::separate(const AudioBuffer& mixture, std::ptrdiff_t offset) const {
  Stems out = run(mixture, offset);
  for (SourceClass c : kAllClasses) {
    if (out[c].frames() != mixture.frames()) {
      fail(Errc::kLengthMismatch, name() + ": estimate '" + std::string(to_string(c)) + "' has " +
                                      std::to_string(out[c].frames()) + " frames, input has " +
                                      std::to_string(mixture.frames()));
    }
  }
  return out;
}

// --- oracle ---------------------------------------------------------------------

OracleIrm::OracleIrm(Stems clean, FrameSpec frames) : clean_(std::move(clean)), frames_(frames) {
  clean_.require_aligned("OracleIrm");
  validate(frames_);
}

Stems OracleIrm::run(const AudioBuffer& mixture, std::ptrdiff_t offset) const {
  const std::size_t n = mixture.frames();
  std::array<Spectrogram, kNumClasses> sliced;
  const std::array<Spectrogram, kNumClasses>* ref_ptr = &sliced;
  if (offset == 0 && n == clean_.frames()) {
    std::call_once(refs_once_, [&] {
      for (SourceClass c : kAllClasses) full_refs_[index_of(c)] = stft(clean_[c], frames_);
    });
    ref_ptr = &full_refs_;
  } else {
    for (SourceClass c : kAllClasses) sliced[index_of(c)] = stft(clean_[c].slice(offset, n), frames_);
  }
  const auto& refs = *ref_ptr;
  const Spectrogram mix = stft(mixture, frames_);

  std::array<Spectrogram, kNumClasses> masked;
  for (auto& m : masked) m = mix;
  const std::size_t cells = mix.num_frames * mix.bins;
  for (std::size_t ch = 0; ch < kChannels; ++ch) {
    for (std::size_t k = 0; k < cells; ++k) {
      std::array<double, kNumClasses> mag{};
      double total = 0.0;
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        mag[c] = std::abs(refs[c].data[ch][k]);
        total += mag[c];
      }
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        const double mask = total > 0.0 ? mag[c] / total : 1.0 / kNumClasses;
        masked[c].data[ch][k] *= mask;
      }
    }
  }
  Stems out;
  for (SourceClass c : kAllClasses) out[c] = istft(masked[index_of(c)]);
  return out;
}

SeparatorPtr oracle_irm(Stems clean, FrameSpec frames) {
  return std::make_shared<OracleIrm>(std::move(clean), frames);
}

// --- simple separators ------------------------------------------------------------

std::string Passthrough::name() const { return "passthrough-" + std::string(to_string(target_)); }

Stems Passthrough::run(const AudioBuffer& mixture, std::ptrdiff_t) const {
  Stems out = Stems::silent(mixture.frames());
  out[target_] = mixture;
  return out;
}

SeparatorPtr passthrough(SourceClass target) { return std::make_shared<Passthrough>(target); }

Stems FixedSeparator::run(const AudioBuffer& mixture, std::ptrdiff_t offset) const {
  Stems out;
  for (SourceClass c : kAllClasses) out[c] = estimates_[c].slice(offset, mixture.frames());
  return out;
}

// --- external process --------------------------------------------------------------

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char ch : s) {
    if (ch == '\'') {
      out += "'\\''";
    } else {
      out += ch;
    }
  }
  return out + "'";
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

ExternalSeparator::ExternalSeparator(std::string command_template, fs::path workdir)
    : command_template_(std::move(command_template)), workdir_(std::move(workdir)) {
  if (command_template_.empty()) fail(Errc::kInvalidArgument, "external separator: empty command");
}

Stems ExternalSeparator::run(const AudioBuffer& mixture, std::ptrdiff_t) const {
  std::lock_guard lock(mutex_);
  const fs::path dir = workdir_ / ("call-" + std::to_string(calls_++));
  fs::remove_all(dir);
  const fs::path out_dir = dir / "out";
  fs::create_directories(out_dir);
  const fs::path input = dir / "mixture.wav";
  save_wav(mixture, input, WavFormat::kFloat32);
  const fs::path stderr_path = dir / "stderr.txt";

  std::string cmd = command_template_;
  const bool has_placeholders = cmd.find("{input}") != std::string::npos || cmd.find("{output}") != std::string::npos;
  if (has_placeholders) {
    replace_all(cmd, "{input}", shell_quote(input.string()));
    replace_all(cmd, "{output}", shell_quote(out_dir.string()));
  } else {
    cmd += " " + shell_quote(input.string()) + " " + shell_quote(out_dir.string());
  }
  const std::string full = "( " + cmd + " ) > /dev/null 2> " + shell_quote(stderr_path.string());
  const int status = std::system(full.c_str());
  const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  if (code != 0) {
    std::string err;
    if (fs::exists(stderr_path)) err = read_text_file(stderr_path);
    fail(Errc::kProcessFailed, "external separator exited with status " + std::to_string(code) + ": " + err);
  }

  Stems out;
  for (SourceClass c : kAllClasses) {
    const fs::path p = out_dir / (std::string(to_string(c)) + ".wav");
    if (!fs::exists(p)) fail(Errc::kMissingOutput, "external separator did not write " + p.filename().string());
    out[c] = load_wav(p);
    if (out[c].frames() != mixture.frames()) {
      fail(Errc::kLengthMismatch, "external separator output " + p.filename().string() + " has " +
                                      std::to_string(out[c].frames()) + " frames, expected " +
                                      std::to_string(mixture.frames()));
    }
  }
  return out;
}

SeparatorPtr external_separator(std::string command_template, fs::path workdir) {
  return std::make_shared<ExternalSeparator>(std::move(command_template), std::move(workdir));
}

}  // namespace sdx
