// affuse/stage1/trainer.hpp

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

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "affuse/metrics.hpp"
#include "affuse/stage1/mtl_grad.hpp"
#include "affuse/stage1/network.hpp"
#include "affuse/stage1/rmsprop.hpp"

namespace affuse::stage1 {

/// Inputs (one sample per row) with gold V/A/D labels already in [-1, 1].
struct Samples {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;  // n x 3

  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
};

inline TripleSeries Columns(const Eigen::MatrixXd &m) {
  TripleSeries t;
  for (std::size_t d = 0; d < kNumDims; ++d) {
    const auto c = m.col(static_cast<Eigen::Index>(d));
    t[d].assign(c.data(), c.data() + c.size());
  }
  return t;
}

struct TrainResult {
  RegressorModel model;     // best-dev-loss snapshot
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  double best_dev_loss = std::numeric_limits<double>::infinity();
};

namespace trainer_internal {

/// Batch loss and d loss / d output; dimensions whose batch CCC is undefined
/// (constant gold and prediction with equal means) contribute nothing.
inline double BatchLossAndGrad(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &gold,
                               const MtlWeights &w, Eigen::MatrixXd &grad) {
  const auto weights = w.AsArray();
  const TripleSeries p = Columns(pred), g = Columns(gold);
  grad = Eigen::MatrixXd::Zero(pred.rows(), pred.cols());
  double loss = 0.0;
  for (std::size_t d = 0; d < kNumDims; ++d) {
    if (weights[d] == 0.0) continue;
    std::vector<double> gd;
    try {
      loss += weights[d] * CccLoss(p[d], g[d]);
      gd = CccGradient(p[d], g[d]);
    } catch (const Error &) {
      continue;
    }
    for (std::size_t i = 0; i < gd.size(); ++i)
      grad(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = -weights[d] * gd[i];
  }
  return loss;
}

inline std::vector<std::vector<std::size_t>> MakeBatches(std::vector<std::size_t> order,
                                                         std::size_t batch) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < order.size(); s += batch)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(s),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), s + batch)));
  // A single trailing sample has no CCC; fold it into the previous batch.
  if (out.size() > 1 && out.back().size() < 2) {
    out[out.size() - 2].push_back(out.back().front());
    out.pop_back();
  }
  return out;
}

}  // namespace trainer_internal

/// Multitask loss of the model on a whole sample set (eval mode).
inline double EvaluateLoss(const RegressorModel &model, const Samples &s, const MtlWeights &w) {
  return MtlLoss(Columns(model.Forward(s.x)), Columns(s.y), w);
}

/// Mini-batch RMSprop on the multitask CCC loss with early stopping on the
/// development loss. Returns the snapshot with the lowest development loss;
/// training stops after `patience` consecutive epochs without a strict
/// improvement or at `max_epochs`.
inline TrainResult Train(const Samples &train, const Samples &dev, const NetConfig &cfg,
                         const MtlWeights &w) {
  ValidateNetConfig(cfg);
  ValidateWeights(w);
  if (train.size() < 2 || dev.size() < 2)
    Fail(ErrorKind::kEmptySplit, "training needs at least 2 train and 2 dev samples");
  if (train.x.cols() != dev.x.cols())
    Fail(ErrorKind::kShapeMismatch, "train and dev feature dimensions differ");
  if (train.y.cols() != static_cast<Eigen::Index>(kNumDims) ||
      dev.y.cols() != static_cast<Eigen::Index>(kNumDims))
    Fail(ErrorKind::kShapeMismatch, "labels must have three columns");
  for (std::size_t d = 0; d < kNumDims; ++d) {
    const auto c = dev.y.col(static_cast<Eigen::Index>(d));
    if (c.maxCoeff() == c.minCoeff())
      Fail(ErrorKind::kDegenerate, std::string("dev labels for ") + kDimNames[d] +
                                       " are constant; CCC undefined");
  }

  RegressorModel model(static_cast<std::size_t>(train.x.cols()), cfg);
  std::vector<std::vector<double>> state;
  for (const auto &l : model.layers()) {
    state.emplace_back(static_cast<std::size_t>(l.weight.size()), 0.0);
    state.emplace_back(static_cast<std::size_t>(l.bias.size()), 0.0);
  }
  const RmsProp opt;
  std::mt19937_64 rng(cfg.seed);

  TrainResult result;
  result.model = model;
  std::vector<EpochLog> log;
  std::size_t since_best = 0;
  std::vector<DenseLayer> grads;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (cfg.shuffle) {
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    }
    double loss_sum = 0.0;
    const auto batches = trainer_internal::MakeBatches(order, cfg.batch_size);
    for (const auto &batch : batches) {
      Eigen::MatrixXd bx(static_cast<Eigen::Index>(batch.size()), train.x.cols());
      Eigen::MatrixXd by(static_cast<Eigen::Index>(batch.size()), train.y.cols());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        bx.row(static_cast<Eigen::Index>(i)) = train.x.row(static_cast<Eigen::Index>(batch[i]));
        by.row(static_cast<Eigen::Index>(i)) = train.y.row(static_cast<Eigen::Index>(batch[i]));
      }
      RegressorModel::Trace trace;
      const Eigen::MatrixXd out = model.ForwardTrain(bx, rng, trace);
      Eigen::MatrixXd grad_out;
      loss_sum += trainer_internal::BatchLossAndGrad(out, by, w, grad_out);
      model.Backward(trace, std::move(grad_out), grads);
      auto &layers = model.mutable_layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        opt.Step(std::span<double>(layers[l].weight.data(), static_cast<std::size_t>(layers[l].weight.size())),
                 std::span<const double>(grads[l].weight.data(), static_cast<std::size_t>(grads[l].weight.size())),
                 state[2 * l], cfg.learning_rate);
        opt.Step(std::span<double>(layers[l].bias.data(), static_cast<std::size_t>(layers[l].bias.size())),
                 std::span<const double>(grads[l].bias.data(), static_cast<std::size_t>(grads[l].bias.size())),
                 state[2 * l + 1], cfg.learning_rate);
      }
    }
    const double dev_loss = EvaluateLoss(model, dev, w);
    log.push_back({epoch, loss_sum / static_cast<double>(batches.size()), dev_loss});
    result.epochs_run = epoch;
    if (dev_loss < result.best_dev_loss) {
      result.best_dev_loss = dev_loss;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  result.model.set_training_log(log);
  return result;
}

}  // namespace affuse::stage1
