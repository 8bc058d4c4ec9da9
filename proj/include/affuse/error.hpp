// affuse/error.hpp

// Copyright 2026  The affuse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affuse {

enum class ErrorKind {
  kZeroVariance,
  kDegenerateInput,
  kInvalidWeights,
  kTooShort,
  kTooFewFrames,
  kUnsupportedRate,
  kUnsupportedFormat,
  kShapeMismatch,
  kDimensionMismatch,
  kDegenerate,
  kMissingFeature,
  kEmptySplit,
  kOutOfRange,
  kUnknownSession,
  kIdMismatch,
  kSpeakerOverlap,
  kMissingAudio,
  kNonPositiveBaseline,
  kDegenerateDifferences,
  kNoConvergence,
  kParse,
  kConfig,
  kIo,
};

inline std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kZeroVariance: return "ZeroVariance";
    case ErrorKind::kDegenerateInput: return "DegenerateInput";
    case ErrorKind::kInvalidWeights: return "InvalidWeights";
    case ErrorKind::kTooShort: return "TooShort";
    case ErrorKind::kTooFewFrames: return "TooFewFrames";
    case ErrorKind::kUnsupportedRate: return "UnsupportedRate";
    case ErrorKind::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kDegenerate: return "Degenerate";
    case ErrorKind::kMissingFeature: return "MissingFeature";
    case ErrorKind::kEmptySplit: return "EmptySplit";
    case ErrorKind::kOutOfRange: return "OutOfRange";
    case ErrorKind::kUnknownSession: return "UnknownSession";
    case ErrorKind::kIdMismatch: return "IdMismatch";
    case ErrorKind::kSpeakerOverlap: return "SpeakerOverlap";
    case ErrorKind::kMissingAudio: return "MissingAudio";
    case ErrorKind::kNonPositiveBaseline: return "NonPositiveBaseline";
    case ErrorKind::kDegenerateDifferences: return "DegenerateDifferences";
    case ErrorKind::kNoConvergence: return "NoConvergence";
    case ErrorKind::kParse: return "Parse";
    case ErrorKind::kConfig: return "Config";
    case ErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + what),
        kind_(kind),
        detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string &detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string &what) {
  throw Error(kind, what);
}

}  // namespace affuse
