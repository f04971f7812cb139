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

#include <cstdint>

#include "sdx/audio.hpp"
#include "sdx/rng.hpp"

namespace sdx::bench {

inline AudioBuffer noise(std::size_t frames, std::uint64_t seed) {
  Rng rng(seed);
  AudioBuffer b(frames);
  for (int c = 0; c < kChannels; ++c)
    for (std::size_t i = 0; i < frames; ++i) b.at(c, i) = rng.uniform(-0.5, 0.5);
  return b;
}

}  // namespace sdx::bench
