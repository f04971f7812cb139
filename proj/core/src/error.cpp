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

#include "sdx/error.hpp"

namespace sdx {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kUnsupportedSampleRate: return "UnsupportedSampleRate";
    case Errc::kUnsupportedFormat: return "UnsupportedFormat";
    case Errc::kMalformedFile: return "MalformedFile";
    case Errc::kIoError: return "IoError";
    case Errc::kInvalidAudio: return "InvalidAudio";
    case Errc::kInvalidSpec: return "InvalidSpec";
    case Errc::kNonColaSpec: return "NonColaSpec";
    case Errc::kSchemaError: return "SchemaError";
    case Errc::kMissingFile: return "MissingFile";
    case Errc::kDuplicateSongId: return "DuplicateSongId";
    case Errc::kUnknownLabel: return "UnknownLabel";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kLogMismatch: return "LogMismatch";
    case Errc::kSilentTarget: return "SilentTarget";
    case Errc::kEmptyInput: return "EmptyInput";
    case Errc::kTooFewSongs: return "TooFewSongs";
    case Errc::kProcessFailed: return "ProcessFailed";
    case Errc::kMissingOutput: return "MissingOutput";
    case Errc::kWindowTooShort: return "WindowTooShort";
    case Errc::kWeightMismatch: return "WeightMismatch";
    case Errc::kDivergence: return "Divergence";
    case Errc::kNumericalFailure: return "NumericalFailure";
    case Errc::kTooFewModels: return "TooFewModels";
    case Errc::kSongTooShort: return "SongTooShort";
    case Errc::kPlanExhausted: return "PlanExhausted";
    case Errc::kDuplicateSubmission: return "DuplicateSubmission";
    case Errc::kUnknownComparison: return "UnknownComparison";
    case Errc::kUnknownSession: return "UnknownSession";
    case Errc::kMissingEstimates: return "MissingEstimates";
  }
  return "Unknown";
}

}  // namespace sdx
