// affuse/stage1/mtl_grad.hpp

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

#include <cstddef>
#include <span>
#include <vector>

#include "affuse/metrics.hpp"

namespace affuse::stage1 {

/// d CCC(x, y) / d x_i for the covariance-form CCC with population moments.
/// With N = 2 cov and D = var_x + var_y + (mu_x - mu_y)^2:
///   dN/dx_i = 2 (y_i - mu_y) / n
///   dD/dx_i = 2 (x_i - mu_y) / n
///   dCCC/dx_i = (dN D - N dD) / D^2
inline std::vector<double> CccGradient(std::span<const double> x, std::span<const double> y) {
  const PairMoments m = ComputeMoments(x, y);
  const double shift = m.mean_x - m.mean_y;
  const double den = m.var_x + m.var_y + shift * shift;
  if (!(den > 0.0))
    Fail(ErrorKind::kDegenerate, "ccc gradient undefined: both series constant, equal mean");
  const double num = 2.0 * m.cov;
  const double n = static_cast<double>(m.n);
  std::vector<double> g(m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    const double dnum = 2.0 * (y[i] - m.mean_y) / n;
    const double dden = 2.0 * (x[i] - m.mean_y) / n;
    g[i] = (dnum * den - num * dden) / (den * den);
  }
  return g;
}

/// Gradient of alpha CCCL_V + beta CCCL_A + (1-alpha-beta) CCCL_D with
/// respect to the predictions. Dimensions with zero weight get a zero
/// gradient without evaluating their CCC.
inline TripleSeries MtlGradient(const TripleSeries &pred, const TripleSeries &gold,
                                const MtlWeights &w) {
  ValidateWeights(w);
  const auto weights = w.AsArray();
  TripleSeries grad;
  for (std::size_t d = 0; d < kNumDims; ++d) {
    if (weights[d] == 0.0) {
      grad[d].assign(pred[d].size(), 0.0);
      continue;
    }
    grad[d] = CccGradient(pred[d], gold[d]);
    for (double &g : grad[d]) g *= -weights[d];
  }
  return grad;
}

}  // namespace affuse::stage1
