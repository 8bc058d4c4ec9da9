// affuse/pipeline/stage1_runner.hpp

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
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "affuse/dsp/features.hpp"
#include "affuse/error.hpp"
#include "affuse/metrics.hpp"
#include "affuse/stage1/network.hpp"
#include "affuse/stage1/predictions.hpp"
#include "affuse/stage1/trainer.hpp"

namespace affuse::pipeline {

using GoldMap = std::unordered_map<std::string, EmotionTriple>;

/// Gathers feature rows and gold labels for the given ids, in order.
inline stage1::Samples BuildSamples(const FeatureTable &features, const std::vector<std::string> &ids,
                                    const GoldMap &gold) {
  stage1::Samples s;
  s.x.resize(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(features.dim()));
  s.y.resize(static_cast<Eigen::Index>(ids.size()), kNumDims);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto *row = features.Find(ids[i]);
    if (row == nullptr) Fail(ErrorKind::kMissingFeature, "no features for utterance '" + ids[i] + "'");
    const auto g = gold.find(ids[i]);
    if (g == gold.end()) Fail(ErrorKind::kMissingFeature, "no gold labels for utterance '" + ids[i] + "'");
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t k = 0; k < row->size(); ++k) s.x(r, static_cast<Eigen::Index>(k)) = (*row)[k];
    for (std::size_t d = 0; d < kNumDims; ++d) s.y(r, static_cast<Eigen::Index>(d)) = g->second[d];
  }
  return s;
}

/// Per-column z-scoring fitted on training rows. Constant columns keep unit
/// scale. After training, the transform is folded into the first layer so
/// the saved network reads raw features.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd inv_scale;

  static Standardizer Fit(const Eigen::MatrixXd &x) {
    Standardizer s;
    s.mean = x.colwise().mean();
    s.inv_scale.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double var = (x.col(c).array() - s.mean(c)).square().mean();
      s.inv_scale(c) = var > 1e-24 ? 1.0 / std::sqrt(var) : 1.0;
    }
    return s;
  }

  Eigen::MatrixXd Apply(const Eigen::MatrixXd &x) const {
    return (x.rowwise() - mean).array().rowwise() * inv_scale.array();
  }

  /// W (x - mu) * s + b  ==  (W diag(s)) x + (b - W diag(s) mu).
  void FoldInto(stage1::RegressorModel &model) const {
    auto &first = model.mutable_layers().front();
    first.weight = first.weight * inv_scale.asDiagonal();
    first.bias -= first.weight * mean.transpose();
  }
};

inline double DevMeanCcc(const stage1::RegressorModel &model, const stage1::Samples &dev,
                         std::array<double, kNumDims> *per_dim = nullptr) {
  const auto pred = stage1::Columns(model.Forward(dev.x));
  const auto gold = stage1::Columns(dev.y);
  std::array<double, kNumDims> c{};
  for (std::size_t d = 0; d < kNumDims; ++d) c[d] = Ccc(pred[d], gold[d]);
  if (per_dim) *per_dim = c;
  return MeanCcc(c);
}

}  // namespace affuse::pipeline
