// affuse/stage1/rmsprop.hpp

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

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <span>

#include "affuse/error.hpp"

namespace affuse::stage1 {

/// RMSprop without momentum:
///   E[g^2] <- decay * E[g^2] + (1 - decay) * g^2
///   theta  <- theta - lr * g / sqrt(E[g^2] + epsilon)
struct RmsProp {
  double decay = 0.9;
  double epsilon = 1e-7;

  void Step(std::span<double> params, std::span<const double> grads,
            std::span<double> mean_square, double lr) const {
    if (params.size() != grads.size() || params.size() != mean_square.size())
      Fail(ErrorKind::kShapeMismatch, "rmsprop parameter, gradient and state sizes differ");
    const auto n = static_cast<Eigen::Index>(params.size());
    Eigen::Map<Eigen::ArrayXd> p(params.data(), n), ms(mean_square.data(), n);
    Eigen::Map<const Eigen::ArrayXd> g(grads.data(), n);
    ms = decay * ms + (1.0 - decay) * g.square();
    p -= lr * g / (ms + epsilon).sqrt();
  }
};

}  // namespace affuse::stage1
