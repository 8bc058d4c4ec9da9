// affuse/pipeline/modality.hpp

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

#include <optional>
#include <string>

#include "affuse/dsp/features.hpp"
#include "affuse/metrics.hpp"
#include "affuse/pipeline/mtl_search.hpp"
#include "affuse/pipeline/split.hpp"
#include "affuse/pipeline/stage1_runner.hpp"
#include "affuse/stage1/predictions.hpp"
#include "affuse/stage1/trainer.hpp"

namespace affuse::pipeline {

/// Stage-1 output for one feature variant.
struct ModalityResult {
  stage1::RegressorModel model;  // reads raw (unstandardized) features
  MtlWeights weights;
  std::optional<MtlSearchResult> search;
  std::size_t best_epoch = 0;
  stage1::PredictionSet dev;
  stage1::PredictionSet test;
};

/// Trains the stage-1 network of one modality on the train split with early
/// stopping on dev, optionally picking the loss weights by grid search, and
/// predicts the dev and test splits.
inline ModalityResult TrainModality(const FeatureTable &features, const SplitPlan &split,
                                    const GoldMap &gold, const stage1::NetConfig &cfg,
                                    const MtlWeights &weights, bool search, std::size_t jobs = 1) {
  stage1::Samples train = BuildSamples(features, split.train_ids, gold);
  stage1::Samples dev = BuildSamples(features, split.dev_ids, gold);
  const Standardizer z = Standardizer::Fit(train.x);
  train.x = z.Apply(train.x);
  dev.x = z.Apply(dev.x);

  ModalityResult r{stage1::RegressorModel(features.dim(), cfg), weights, std::nullopt, 0, {}, {}};
  if (search) {
    r.search = MtlGridSearch(train, dev, cfg, jobs);
    r.weights = r.search->best;
    r.model = r.search->best_model->model;
    r.best_epoch = r.search->best_model->best_epoch;
    r.search->best_model.reset();
  } else {
    ValidateWeights(weights);
    auto res = stage1::Train(train, dev, cfg, weights);
    r.model = std::move(res.model);
    r.best_epoch = res.best_epoch;
  }
  z.FoldInto(r.model);
  r.dev = stage1::PredictSet(r.model, features, split.dev_ids, "dev");
  r.test = stage1::PredictSet(r.model, features, split.test_ids, "test");
  return r;
}

}  // namespace affuse::pipeline
