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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sdx/audio.hpp"
#include "sdx/dataset.hpp"
#include "sdx/error.hpp"
#include "sdx/rng.hpp"

namespace sdx::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("sdx-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline AudioBuffer sine(double hz, std::size_t n, double amp = 0.5, double phase = 0.0, double pan = 0.5) {
  AudioBuffer out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / kSampleRate + phase);
    out.at(0, i) = v * (1.0 - pan) * 2.0;
    out.at(1, i) = v * pan * 2.0;
  }
  return out;
}

inline AudioBuffer noise(std::size_t n, std::uint64_t seed, double amp = 0.5) {
  Rng rng(seed);
  AudioBuffer out(n);
  for (int c = 0; c < kChannels; ++c) {
    for (std::size_t i = 0; i < n; ++i) out.at(c, i) = amp * rng.uniform(-1.0, 1.0);
  }
  return out;
}

// Four spectrally disjoint sines, one per class.
inline Stems disjoint_stems(std::size_t n, double amp = 0.3) {
  Stems s;
  s[SourceClass::kVocals] = sine(660.0, n, amp, 0.3, 0.4);
  s[SourceClass::kBass] = sine(110.0, n, amp, 0.1, 0.5);
  s[SourceClass::kDrums] = sine(5500.0, n, amp, 0.7, 0.6);
  s[SourceClass::kOther] = sine(2200.0, n, amp, 1.1, 0.3);
  return s;
}

// Error code thrown by fn, if any.
inline std::optional<Errc> thrown(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline double energy_db(const AudioBuffer& b) { return 10.0 * std::log10(b.energy()); }

}  // namespace sdx::test
