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

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdx {

enum class Errc {
  kInvalidArgument,
  kUnsupportedSampleRate,
  kUnsupportedFormat,
  kMalformedFile,
  kIoError,
  kInvalidAudio,
  kInvalidSpec,
  kNonColaSpec,
  kSchemaError,
  kMissingFile,
  kDuplicateSongId,
  kUnknownLabel,
  kLengthMismatch,
  kLogMismatch,
  kSilentTarget,
  kEmptyInput,
  kTooFewSongs,
  kProcessFailed,
  kMissingOutput,
  kWindowTooShort,
  kWeightMismatch,
  kDivergence,
  kNumericalFailure,
  kTooFewModels,
  kSongTooShort,
  kPlanExhausted,
  kDuplicateSubmission,
  kUnknownComparison,
  kUnknownSession,
  kMissingEstimates,
};

// Stable identifier used in machine-readable error output ("UnknownLabel").
std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace sdx
