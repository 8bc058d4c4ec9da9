// affuse/pipeline/labels.hpp

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

#include <array>
#include <cmath>
#include <string>

#include "affuse/error.hpp"
#include "affuse/metrics.hpp"

namespace affuse::pipeline {

inline constexpr double kRawMin = 1.0;
inline constexpr double kRawMax = 5.0;

inline bool InRawRange(double raw) { return raw >= kRawMin && raw <= kRawMax; }

/// Five-point rating to [-1, 1].
inline double ScaleLabel(double raw) {
  if (!std::isfinite(raw) || !InRawRange(raw))
    Fail(ErrorKind::kOutOfRange, "label " + std::to_string(raw) + " is outside [1, 5]");
  return (raw - 3.0) / 2.0;
}

inline double UnscaleLabel(double scaled) {
  if (!std::isfinite(scaled) || scaled < -1.0 || scaled > 1.0)
    Fail(ErrorKind::kOutOfRange, "scaled label " + std::to_string(scaled) + " is outside [-1, 1]");
  return 2.0 * scaled + 3.0;
}

inline EmotionTriple ScaleTriple(const std::array<double, kNumDims> &raw) {
  EmotionTriple t;
  for (std::size_t d = 0; d < kNumDims; ++d) t[d] = ScaleLabel(raw[d]);
  return t;
}

}  // namespace affuse::pipeline
