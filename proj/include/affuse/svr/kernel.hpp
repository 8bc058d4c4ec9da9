// affuse/svr/kernel.hpp

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

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "affuse/error.hpp"

namespace affuse::svr {

/// Gaussian RBF kernel exp(-gamma * ||xi - xj||^2).
inline double RbfKernel(std::span<const double> xi, std::span<const double> xj, double gamma) {
  if (xi.size() != xj.size())
    Fail(ErrorKind::kDimensionMismatch, "kernel inputs have dimensions " +
                                            std::to_string(xi.size()) + " and " +
                                            std::to_string(xj.size()));
  double d2 = 0.0;
  for (std::size_t k = 0; k < xi.size(); ++k) {
    const double d = xi[k] - xj[k];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

/// Dense symmetric Gram matrix, row-major n x n.
inline std::vector<double> GramMatrix(const std::vector<std::vector<double>> &xs, double gamma) {
  const std::size_t n = xs.size();
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    k[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) k[i * n + j] = k[j * n + i] = RbfKernel(xs[i], xs[j], gamma);
  }
  return k;
}

}  // namespace affuse::svr
