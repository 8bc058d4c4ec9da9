// tests/stage1_test.cpp

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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "affuse/stage1/model_io.hpp"
#include "affuse/stage1/mtl_grad.hpp"
#include "affuse/stage1/network.hpp"
#include "affuse/stage1/predictions.hpp"
#include "affuse/stage1/rmsprop.hpp"
#include "affuse/stage1/text_features.hpp"
#include "affuse/stage1/trainer.hpp"
#include "grad_check.hpp"

namespace affuse::stage1 {
namespace {

TripleSeries RandomSeries(std::mt19937_64 &rng, std::size_t n) {
  std::normal_distribution<double> nd;
  TripleSeries s;
  for (auto &c : s) {
    c.resize(n);
    for (double &v : c) v = 0.5 * nd(rng);
  }
  return s;
}

// Labels are a fixed linear map of the features, kept inside (-1, 1).
Samples LinearTask(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd map(dim, 3);
  std::mt19937_64 map_rng(1234);
  for (Eigen::Index i = 0; i < map.size(); ++i) map.data()[i] = nd(map_rng) / std::sqrt(double(dim));
  Samples s;
  s.x.resize(n, dim);
  for (Eigen::Index i = 0; i < s.x.size(); ++i) s.x.data()[i] = nd(rng);
  s.y = 0.3 * s.x * map;
  return s;
}

TEST(RmsProp, ZeroGradientLeavesParams) {
  std::vector<double> p{1.0, -2.0}, g{0.0, 0.0}, st{0.0, 0.0};
  RmsProp{}.Step(p, g, st, 0.001);
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], -2.0);
}

TEST(RmsProp, FirstStepAlgebra) {
  const double g0 = 0.37, lr = 0.001;
  std::vector<double> p{0.0}, g{g0}, st{0.0};
  RmsProp{}.Step(p, g, st, lr);
  EXPECT_DOUBLE_EQ(p[0], -lr * g0 / std::sqrt(0.1 * g0 * g0 + 1e-7));
}

TEST(RmsProp, ConstantGradientStepApproachesLearningRate) {
  std::vector<double> p{0.0}, g{2.5}, st{0.0};
  double before = 0.0;
  for (int i = 0; i < 1000; ++i) {
    before = p[0];
    RmsProp{}.Step(p, g, st, 0.01);
  }
  EXPECT_NEAR(std::abs(p[0] - before), 0.01, 0.01 * 0.01);
}

TEST(MtlGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ud(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const TripleSeries pred = RandomSeries(rng, 32), gold = RandomSeries(rng, 32);
    double a = ud(rng), b = ud(rng);
    if (a + b > 1) {
      a = 1 - a;
      b = 1 - b;
    }
    const MtlWeights w{a, b};
    const auto analytic = MtlGradient(pred, gold, w);
    const auto numeric = testing::NumericMtlGradient(pred, gold, w);
    EXPECT_LT(testing::MaxRelativeError(analytic, numeric), 1e-4) << "trial " << trial;
  }
}

TEST(MtlGrad, ZeroAtPerfectAgreement) {
  std::mt19937_64 rng(8);
  const TripleSeries gold = RandomSeries(rng, 16);
  const MtlWeights w{0.2, 0.5};
  EXPECT_NEAR(MtlLoss(gold, gold, w), 0.0, 1e-15);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 10; ++k) {
    TripleSeries dir = RandomSeries(rng, 16), plus = gold, minus = gold;
    double norm = 0;
    for (auto &c : dir) for (double v : c) norm += v * v;
    norm = std::sqrt(norm);
    for (std::size_t d = 0; d < 3; ++d)
      for (std::size_t i = 0; i < 16; ++i) {
        plus[d][i] += 1e-4 * dir[d][i] / norm;
        minus[d][i] -= 1e-4 * dir[d][i] / norm;
      }
    const double directional = (MtlLoss(plus, gold, w) - MtlLoss(minus, gold, w)) / 2e-4;
    EXPECT_LT(std::abs(directional), 1e-6);
  }
  for (const auto &c : MtlGradient(gold, gold, w))
    for (double v : c) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(MtlGrad, ValenceOnlyWeights) {
  std::mt19937_64 rng(9);
  const TripleSeries pred = RandomSeries(rng, 10), gold = RandomSeries(rng, 10);
  const auto g = MtlGradient(pred, gold, {1.0, 0.0});
  double nz = 0;
  for (double v : g[0]) nz += std::abs(v);
  EXPECT_GT(nz, 0.0);
  for (std::size_t d = 1; d < 3; ++d)
    for (double v : g[d]) EXPECT_EQ(v, 0.0);
}

TEST(MtlGrad, DegenerateBatch) {
  TripleSeries flat{std::vector{0.5, 0.5}, std::vector{0.5, 0.5}, std::vector{0.5, 0.5}};
  try {
    MtlGradient(flat, flat, {});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerate);
  }
}

TEST(Forward, ZeroWeightsTanhGivesZero) {
  NetConfig cfg;
  cfg.hidden_layers = {4};
  RegressorModel m(5, cfg);
  for (auto &l : m.mutable_layers()) {
    l.weight.setZero();
    l.bias.setZero();
  }
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 5);
  EXPECT_TRUE(m.Forward(x).isZero(0.0));
}

TEST(Forward, LinearSingleLayerIsTheConfiguredMap) {
  NetConfig cfg;
  cfg.hidden_layers = {};
  cfg.output_activation = Activation::kLinear;
  DenseLayer l;
  l.weight.resize(3, 2);
  l.weight << 1, 0, 0, 1, 2, -1;
  l.bias = Eigen::Vector3d(0.1, 0.2, 0.3);
  RegressorModel m(2, cfg, {l});
  Eigen::MatrixXd x(1, 2);
  x << 0.5, -0.25;
  const auto t = m.ForwardTriples(x);
  EXPECT_DOUBLE_EQ(t[0][0], 0.6);
  EXPECT_DOUBLE_EQ(t[0][1], -0.05);
  EXPECT_DOUBLE_EQ(t[0][2], 1.55);
  EXPECT_THROW(m.Forward(Eigen::MatrixXd::Zero(1, 3)), Error);
}

TEST(Forward, SeededModelsAreIdentical) {
  NetConfig cfg;
  cfg.seed = 77;
  RegressorModel a(12, cfg), b(12, cfg);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 12);
  EXPECT_EQ(a.Forward(x), b.Forward(x));
}

TEST(Forward, TanhHeadsStayInsideOpenInterval) {
  NetConfig cfg;
  cfg.hidden_layers = {8};
  RegressorModel m(3, cfg);
  for (auto &l : m.mutable_layers()) l.weight *= 1e6;
  const Eigen::MatrixXd out = m.Forward(Eigen::MatrixXd::Random(50, 3) * 100);
  EXPECT_LT(out.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Forward, DropoutZeroTrainEqualsEval) {
  NetConfig cfg;
  cfg.hidden_layers = {16, 16};
  RegressorModel m(6, cfg);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 6);
  std::mt19937_64 rng(1);
  RegressorModel::Trace trace;
  EXPECT_EQ(m.ForwardTrain(x, rng, trace), m.Forward(x));
}

TEST(Backward, MatchesFiniteDifferencesWithTanhAndDropout) {
  for (Activation hidden : {Activation::kLinear, Activation::kTanh, Activation::kRelu}) {
    NetConfig cfg;
    cfg.hidden_layers = {7, 5};
    cfg.hidden_activation = hidden;
    cfg.dropout_rate = 0.3;
    cfg.seed = 3;
    RegressorModel m(4, cfg);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 4);
    const Eigen::MatrixXd upstream = Eigen::MatrixXd::Random(6, 3);
    std::mt19937_64 rng(5);
    RegressorModel::Trace trace;
    m.ForwardTrain(x, rng, trace);
    const auto grads = m.Backward(trace, upstream);
    // Perturb one weight per layer; re-run with the same dropout stream.
    for (std::size_t l = 0; l < m.layers().size(); ++l) {
      auto objective = [&](double delta) {
        RegressorModel p = m;
        p.mutable_layers()[l].weight(0, 1) += delta;
        std::mt19937_64 r(5);
        RegressorModel::Trace t;
        return (p.ForwardTrain(x, r, t).array() * upstream.array()).sum();
      };
      const double numeric = (objective(1e-6) - objective(-1e-6)) / 2e-6;
      EXPECT_NEAR(grads[l].weight(0, 1), numeric, 1e-6 * (1 + std::abs(numeric)))
          << ActivationName(hidden) << " layer " << l;
    }
  }
}

TEST(Train, LearnsLinearMap) {
  const Samples train = LinearTask(2000, 10, 1), dev = LinearTask(400, 10, 2);
  NetConfig cfg;
  cfg.seed = 5;
  const auto r = Train(train, dev, cfg, {1.0 / 3, 1.0 / 3});
  const auto ccc = CccPerDim(Columns(r.model.Forward(train.x)), Columns(train.y));
  EXPECT_GT(MeanCcc(ccc), 0.9);
  EXPECT_LE(r.epochs_run, 50u);
  EXPECT_TRUE(r.model.AllFinite());
}

TEST(Train, PatienceOneStopsAtEpochTwoWhenDevDoesNotImprove) {
  const Samples train = LinearTask(64, 4, 1), dev = LinearTask(32, 4, 2);
  NetConfig cfg;
  cfg.hidden_layers = {8};
  cfg.patience = 1;
  cfg.learning_rate = 0.0;  // dev loss is flat from epoch 1 on
  const auto r = Train(train, dev, cfg, {});
  EXPECT_EQ(r.epochs_run, 2u);
  EXPECT_EQ(r.best_epoch, 1u);
}

TEST(Train, ReturnsBestSnapshotAndIsDeterministic) {
  const Samples train = LinearTask(300, 6, 3), dev = LinearTask(100, 6, 4);
  NetConfig cfg;
  cfg.hidden_layers = {32, 32};
  cfg.max_epochs = 12;
  cfg.dropout_rate = 0.2;
  cfg.shuffle = true;
  cfg.seed = 99;
  const MtlWeights w{0.1, 0.5};
  const auto a = Train(train, dev, cfg, w);
  const auto b = Train(train, dev, cfg, w);
  for (std::size_t l = 0; l < a.model.layers().size(); ++l) {
    EXPECT_EQ(a.model.layers()[l].weight, b.model.layers()[l].weight);
    EXPECT_EQ(a.model.layers()[l].bias, b.model.layers()[l].bias);
  }
  double best = 1e300;
  for (const auto &e : a.model.training_log()) best = std::min(best, e.dev_loss);
  EXPECT_EQ(best, a.best_dev_loss);
  EXPECT_EQ(EvaluateLoss(a.model, dev, w), a.best_dev_loss);
}

TEST(Train, ConstantDevLabelsAreDegenerate) {
  const Samples train = LinearTask(20, 3, 1);
  Samples dev = LinearTask(10, 3, 2);
  dev.y.col(1).setConstant(0.25);
  try {
    Train(train, dev, NetConfig{}, {});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerate);
  }
}

TEST(ModelIo, RoundTripPreservesPredictions) {
  const Samples train = LinearTask(60, 5, 1), dev = LinearTask(30, 5, 2);
  NetConfig cfg;
  cfg.hidden_layers = {9, 4};
  cfg.max_epochs = 3;
  const auto r = Train(train, dev, cfg, {});
  const auto loaded = DecodeModel(EncodeModel(r.model, "HSF2"));
  EXPECT_EQ(loaded.schema_id, "HSF2");
  EXPECT_EQ(loaded.model.Forward(dev.x), r.model.Forward(dev.x));
  EXPECT_EQ(loaded.model.training_log().size(), r.model.training_log().size());
  EXPECT_EQ(loaded.model.config().hidden_layers, cfg.hidden_layers);
  EXPECT_THROW(DecodeModel("garbage"), Error);
}

TEST(PredictSet, OrderErrorsAndCsvRoundTrip) {
  NetConfig cfg;
  cfg.hidden_layers = {4};
  RegressorModel m(2, cfg);
  FeatureTable feats("HSF1");
  feats.Add("a", {0.1, 0.2});
  feats.Add("b", {0.3, -0.2});
  feats.Add("c", {-0.5, 0.9});
  const auto p = PredictSet(m, feats, {"c", "a"}, "dev");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.ids[0], "c");
  EXPECT_EQ(PredictSet(m, feats, {"c", "a"}, "dev").triples, p.triples);
  EXPECT_THROW(PredictSet(m, feats, {}, "dev"), Error);
  try {
    PredictSet(m, feats, {"a", "zz"}, "test");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingFeature);
    EXPECT_NE(std::string(e.what()).find("zz"), std::string::npos);
  }
  std::stringstream ss;
  WritePredictionCsv(ss, p);
  const auto back = ReadPredictionCsv(ss);
  EXPECT_EQ(back.ids, p.ids);
  EXPECT_EQ(back.triples, p.triples);
  EXPECT_EQ(back.split_tag, "dev");
}

TEST(TextFeatures, Examples) {
  const auto empty = HashTextFeatures("", 300, 1);
  EXPECT_EQ(empty.schema_id, "TEXT-300");
  ASSERT_EQ(empty.values.size(), 300u);
  for (double v : empty.values) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(HashTextFeatures("good great lovely", 300, 1).values,
            HashTextFeatures("good great lovely", 300, 1).values);
  EXPECT_EQ(HashTextFeatures("good great lovely", 300, 1).values,
            HashTextFeatures("lovely, good great!", 300, 1).values);
  EXPECT_NE(HashTextFeatures("good", 300, 1).values, HashTextFeatures("good", 300, 2).values);
  const auto single = HashTextFeatures("Hello", 300, 4);
  double norm = 0;
  for (double v : single.values) norm += v * v;
  EXPECT_NEAR(norm, 1.0, 1e-12);
  EXPECT_EQ(Tokenize("It's a  test, OK?"), (std::vector<std::string>{"it's", "a", "test", "ok"}));
}

TEST(TextFeatures, Variants) {
  const auto bi = HashBigramFeatures("one two three", 64, 0);
  EXPECT_EQ(bi.schema_id, "TEXT-BIGRAM-64");
  IdfWeights idf({"the cat", "the dog", "the bird"});
  EXPECT_GT(idf.Weight("cat"), idf.Weight("the"));
  const auto f = HashIdfFeatures("the cat", idf, 64, 0);
  EXPECT_EQ(f.schema_id, "TEXT-IDF-64");
  EXPECT_EQ(HashIdfFeatures("", idf, 64, 0).values, std::vector<double>(64, 0.0));
}

}  // namespace
}  // namespace affuse::stage1
