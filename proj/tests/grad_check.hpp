// tests/grad_check.hpp

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

// Finite-difference oracle shared by the stage-1 unit tests and the
// acceptance suite. Deliberately independent of mtl_grad.hpp: it only calls
// the loss.
#pragma once

#include <algorithm>
#include <cmath>

#include "affuse/metrics.hpp"

namespace affuse::testing {

/// Central differences of MtlLoss with respect to every prediction entry.
inline TripleSeries NumericMtlGradient(TripleSeries pred, const TripleSeries &gold,
                                       const MtlWeights &w, double h = 1e-5) {
  TripleSeries g;
  for (std::size_t d = 0; d < kNumDims; ++d) {
    g[d].resize(pred[d].size());
    for (std::size_t i = 0; i < pred[d].size(); ++i) {
      const double keep = pred[d][i];
      pred[d][i] = keep + h;
      const double up = MtlLoss(pred, gold, w);
      pred[d][i] = keep - h;
      const double down = MtlLoss(pred, gold, w);
      pred[d][i] = keep;
      g[d][i] = (up - down) / (2 * h);
    }
  }
  return g;
}

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
inline double MaxRelativeError(const TripleSeries &a, const TripleSeries &b, double floor = 1e-8) {
  double worst = 0.0;
  for (std::size_t d = 0; d < kNumDims; ++d)
    for (std::size_t i = 0; i < a[d].size(); ++i) {
      const double den = std::max({std::abs(a[d][i]), std::abs(b[d][i]), floor});
      worst = std::max(worst, std::abs(a[d][i] - b[d][i]) / den);
    }
  return worst;
}

}  // namespace affuse::testing
