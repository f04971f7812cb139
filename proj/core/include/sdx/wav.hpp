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

#include <filesystem>
#include <string>
#include <string_view>

#include "sdx/audio.hpp"

namespace sdx {

// Sample encodings accepted on write. Reading also accepts 24-bit PCM.
enum class WavFormat { kPcm16, kFloat32 };

struct WavReadOptions {
  // Duplicate a mono file into both channels instead of rejecting it.
  bool allow_mono = false;
};

// RIFF/WAVE decoding: PCM16, PCM24 or IEEE float32 (plain or extensible
// header), 44100 Hz, one or two channels.
AudioBuffer decode_wav(std::string_view bytes, const WavReadOptions& options = {});
std::string encode_wav(const AudioBuffer& buffer, WavFormat format = WavFormat::kFloat32);

AudioBuffer load_wav(const std::filesystem::path& path, const WavReadOptions& options = {});
void save_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
              WavFormat format = WavFormat::kFloat32);

WavFormat parse_wav_format(std::string_view name);

}  // namespace sdx
