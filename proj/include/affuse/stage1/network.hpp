// affuse/stage1/network.hpp

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

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affuse/error.hpp"
#include "affuse/metrics.hpp"

namespace affuse::stage1 {

enum class Activation { kLinear, kTanh, kRelu };

inline std::string_view ActivationName(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
  }
  return "linear";
}

inline Activation ParseActivation(std::string_view s) {
  if (s == "linear") return Activation::kLinear;
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  Fail(ErrorKind::kConfig, "unknown activation '" + std::string(s) + "'");
}

/// Dense regressor hyper-parameters. Defaults follow the HSF acoustic setup:
/// three 256-unit linear layers, tanh heads, no dropout, RMSprop at 1e-3,
/// batch 8, at most 50 epochs with patience 10.
struct NetConfig {
  std::vector<std::size_t> hidden_layers{256, 256, 256};
  Activation hidden_activation = Activation::kLinear;
  Activation output_activation = Activation::kTanh;
  double dropout_rate = 0.0;
  double learning_rate = 0.001;
  std::size_t batch_size = 8;
  std::size_t max_epochs = 50;
  std::size_t patience = 10;
  bool shuffle = false;
  std::uint64_t seed = 0;
};

inline void ValidateNetConfig(const NetConfig &c) {
  for (std::size_t w : c.hidden_layers)
    if (w == 0) Fail(ErrorKind::kConfig, "hidden layer widths must be positive");
  if (!(c.dropout_rate >= 0.0 && c.dropout_rate < 1.0))
    Fail(ErrorKind::kConfig, "dropout_rate must lie in [0, 1)");
  if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate))
    Fail(ErrorKind::kConfig, "learning_rate must be a finite non-negative number");
  if (c.batch_size == 0 || c.max_epochs == 0 || c.patience == 0)
    Fail(ErrorKind::kConfig, "batch_size, max_epochs and patience must be positive");
}

/// Uniform double in [0, 1) from the top 53 bits; portable across standard
/// libraries, unlike std::uniform_real_distribution.
inline double Unit(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Multilayer dense network ending in three scalar heads (V, A, D). The three
/// heads share the last hidden layer and are stored as one 3-row output layer.
class RegressorModel {
 public:
  RegressorModel() = default;

  /// Glorot-uniform weights, zero biases.
  RegressorModel(std::size_t input_dim, const NetConfig &cfg) : cfg_(cfg), input_dim_(input_dim) {
    ValidateNetConfig(cfg);
    if (input_dim == 0) Fail(ErrorKind::kShapeMismatch, "input dimension must be positive");
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::size_t fan_in = input_dim;
    auto add = [&](std::size_t fan_out) {
      DenseLayer l;
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      l.weight.resize(static_cast<Eigen::Index>(fan_out), static_cast<Eigen::Index>(fan_in));
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
          l.weight(r, c) = (2.0 * Unit(rng) - 1.0) * limit;
      l.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fan_out));
      layers_.push_back(std::move(l));
      fan_in = fan_out;
    };
    for (std::size_t w : cfg.hidden_layers) add(w);
    add(kNumDims);
  }

  /// Builds a model from explicit layers (used by the file loader and tests).
  RegressorModel(std::size_t input_dim, const NetConfig &cfg, std::vector<DenseLayer> layers)
      : cfg_(cfg), input_dim_(input_dim), layers_(std::move(layers)) {
    CheckShapes();
  }

  const NetConfig &config() const { return cfg_; }
  std::size_t input_dim() const { return input_dim_; }
  const std::vector<DenseLayer> &layers() const { return layers_; }
  std::vector<DenseLayer> &mutable_layers() { return layers_; }
  const std::vector<EpochLog> &training_log() const { return training_log_; }
  void set_training_log(std::vector<EpochLog> log) { training_log_ = std::move(log); }

  /// Eval-mode forward pass; `x` holds one sample per row.
  Eigen::MatrixXd Forward(const Eigen::MatrixXd &x) const {
    CheckInput(x);
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Eigen::MatrixXd z = a * layers_[l].weight.transpose();
      z.rowwise() += layers_[l].bias.transpose();
      const bool last = l + 1 == layers_.size();
      Apply(last ? cfg_.output_activation : cfg_.hidden_activation, z, last);
      a = std::move(z);
    }
    return a;
  }

  std::vector<EmotionTriple> ForwardTriples(const Eigen::MatrixXd &x) const {
    const Eigen::MatrixXd out = Forward(x);
    std::vector<EmotionTriple> t(static_cast<std::size_t>(out.rows()));
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (std::size_t d = 0; d < kNumDims; ++d)
        t[static_cast<std::size_t>(i)][d] = out(i, static_cast<Eigen::Index>(d));
    return t;
  }

  /// Activations retained for backpropagation.
  struct Trace {
    std::vector<Eigen::MatrixXd> activations;  // [0] = input
    std::vector<Eigen::MatrixXd> masks;        // dropout masks per hidden layer (maybe empty)
  };

  /// Train-mode forward pass with inverted dropout after each hidden layer.
  Eigen::MatrixXd ForwardTrain(const Eigen::MatrixXd &x, std::mt19937_64 &rng, Trace &trace) const {
    CheckInput(x);
    trace.activations.assign(1, x);
    trace.masks.assign(layers_.size(), Eigen::MatrixXd());
    const double keep = 1.0 - cfg_.dropout_rate;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const bool last = l + 1 == layers_.size();
      Eigen::MatrixXd z = trace.activations.back() * layers_[l].weight.transpose();
      z.rowwise() += layers_[l].bias.transpose();
      Apply(last ? cfg_.output_activation : cfg_.hidden_activation, z, last);
      if (!last && cfg_.dropout_rate > 0.0) {
        Eigen::MatrixXd mask(z.rows(), z.cols());
        for (Eigen::Index c = 0; c < mask.cols(); ++c)
          for (Eigen::Index r = 0; r < mask.rows(); ++r)
            mask(r, c) = Unit(rng) < cfg_.dropout_rate ? 0.0 : 1.0 / keep;
        z = z.cwiseProduct(mask);
        trace.masks[l] = std::move(mask);
      }
      trace.activations.push_back(std::move(z));
    }
    return trace.activations.back();
  }

  /// Parameter gradients given d loss / d output (rows = samples, 3 cols).
  /// `grads` is resized on first use and reused afterwards.
  void Backward(const Trace &trace, Eigen::MatrixXd grad_out, std::vector<DenseLayer> &grads) const {
    grads.resize(layers_.size());
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const bool last = l + 1 == layers_.size();
      const bool masked = !last && trace.masks[l].size() > 0;
      const Eigen::MatrixXd &out = trace.activations[l + 1];
      if (masked) grad_out.array() *= trace.masks[l].array();
      const Activation act = last ? cfg_.output_activation : cfg_.hidden_activation;
      if (act != Activation::kLinear) {
        // Derivatives come from the activation output; undo the dropout scale
        // first (dropped units already carry a zero gradient).
        Eigen::MatrixXd pre_out = out;
        if (masked)
          pre_out = out.binaryExpr(trace.masks[l], [](double o, double m) { return m > 0 ? o / m : 0.0; });
        if (act == Activation::kTanh)
          grad_out.array() *= 1.0 - pre_out.array().square();
        else
          grad_out.array() *= (pre_out.array() > 0.0).cast<double>();
      }
      const Eigen::MatrixXd &in = trace.activations[l];
      grads[l].weight.noalias() = grad_out.transpose() * in;
      grads[l].bias.noalias() = grad_out.colwise().sum().transpose();
      if (l > 0) grad_out = grad_out * layers_[l].weight;
    }
  }

  std::vector<DenseLayer> Backward(const Trace &trace, const Eigen::MatrixXd &grad_out) const {
    std::vector<DenseLayer> grads;
    Backward(trace, grad_out, grads);
    return grads;
  }

  std::size_t ParameterCount() const {
    std::size_t n = 0;
    for (const auto &l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  bool AllFinite() const {
    for (const auto &l : layers_)
      if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    return true;
  }

 private:
  // Saturated tanh heads are pulled just inside (-1, 1) so predictions never
  // hit the label bounds exactly.
  static void Apply(Activation a, Eigen::MatrixXd &z, bool output) {
    static constexpr double kHeadBound = 1.0 - 0x1.0p-52;
    switch (a) {
      case Activation::kLinear: break;
      case Activation::kTanh:
        z = z.array().tanh().matrix();
        if (output) z = z.cwiseMax(-kHeadBound).cwiseMin(kHeadBound);
        break;
      case Activation::kRelu: z = z.cwiseMax(0.0); break;
    }
  }

  void CheckInput(const Eigen::MatrixXd &x) const {
    if (static_cast<std::size_t>(x.cols()) != input_dim_)
      Fail(ErrorKind::kShapeMismatch, "model expects " + std::to_string(input_dim_) +
                                          " input features, got " + std::to_string(x.cols()));
  }

  void CheckShapes() const {
    if (layers_.empty()) Fail(ErrorKind::kShapeMismatch, "model has no layers");
    std::size_t fan_in = input_dim_;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto &L = layers_[l];
      if (static_cast<std::size_t>(L.weight.cols()) != fan_in || L.bias.size() != L.weight.rows())
        Fail(ErrorKind::kShapeMismatch, "layer " + std::to_string(l) + " shape does not chain");
      fan_in = static_cast<std::size_t>(L.weight.rows());
    }
    if (fan_in != kNumDims) Fail(ErrorKind::kShapeMismatch, "output layer must have 3 heads");
  }

  NetConfig cfg_;
  std::size_t input_dim_ = 0;
  std::vector<DenseLayer> layers_;
  std::vector<EpochLog> training_log_;
};

/// Packs rows of `values` selected by `index` into a sample-per-row matrix.
template <typename RowAccess>
Eigen::MatrixXd GatherRows(std::size_t dim, std::span<const std::size_t> index, RowAccess row) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(index.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < index.size(); ++i) {
    const std::vector<double> &r = row(index[i]);
    for (std::size_t k = 0; k < dim; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = r[k];
  }
  return m;
}

}  // namespace affuse::stage1
