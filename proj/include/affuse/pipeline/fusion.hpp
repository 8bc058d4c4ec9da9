// affuse/pipeline/fusion.hpp

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

#include <algorithm>
#include <array>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "affuse/error.hpp"
#include "affuse/metrics.hpp"
#include "affuse/pipeline/parallel.hpp"
#include "affuse/pipeline/stage1_runner.hpp"
#include "affuse/stage1/predictions.hpp"
#include "affuse/svr/svr.hpp"

namespace affuse::pipeline {

struct FusionResult {
  stage1::PredictionSet fused;  // test ids, acoustic order
  std::array<svr::SvrModel, kNumDims> models;
  bool converged() const {
    return std::all_of(models.begin(), models.end(), [](const auto &m) { return m.converged; });
  }
};

namespace fusion_internal {

inline void CheckAligned(const stage1::PredictionSet &a, const stage1::PredictionSet &t,
                         const std::string &split) {
  const std::set<std::string> sa(a.ids.begin(), a.ids.end()), st(t.ids.begin(), t.ids.end());
  if (sa == st && sa.size() == a.size() && st.size() == t.size()) return;
  std::vector<std::string> bad;
  std::set_symmetric_difference(sa.begin(), sa.end(), st.begin(), st.end(), std::back_inserter(bad));
  std::string list;
  for (std::size_t i = 0; i < bad.size() && i < 10; ++i) list += (i ? ", " : "") + bad[i];
  if (bad.size() > 10) list += ", ... (" + std::to_string(bad.size()) + " in total)";
  if (bad.empty()) list = "duplicate ids";
  Fail(ErrorKind::kIdMismatch, split + " predictions of the two modalities differ: " + list);
}

inline std::unordered_map<std::string, std::size_t> Index(const stage1::PredictionSet &p) {
  std::unordered_map<std::string, std::size_t> m;
  for (std::size_t i = 0; i < p.size(); ++i) m.emplace(p.ids[i], i);
  return m;
}

}  // namespace fusion_internal

/// Second stage: per dimension, an epsilon-SVR maps the (acoustic, text)
/// dev prediction pair to the gold label; it then fuses the test pairs.
inline FusionResult Fuse(const stage1::PredictionSet &dev_acoustic, const stage1::PredictionSet &dev_text,
                         const stage1::PredictionSet &test_acoustic,
                         const stage1::PredictionSet &test_text, const GoldMap &gold,
                         const svr::SvrConfig &cfg, std::size_t jobs = 1) {
  using namespace fusion_internal;
  CheckAligned(dev_acoustic, dev_text, "dev");
  CheckAligned(test_acoustic, test_text, "test");
  if (dev_acoustic.size() == 0) Fail(ErrorKind::kEmptySplit, "no dev predictions to fuse");
  std::vector<std::string> no_gold;
  for (const auto &id : dev_acoustic.ids)
    if (!gold.count(id)) no_gold.push_back(id);
  if (!no_gold.empty()) {
    std::string list;
    for (std::size_t i = 0; i < no_gold.size() && i < 10; ++i) list += (i ? ", " : "") + no_gold[i];
    Fail(ErrorKind::kIdMismatch, "dev ids without gold labels: " + list);
  }
  const auto dev_t = Index(dev_text), test_t = Index(test_text);

  FusionResult r;
  r.fused.ids = test_acoustic.ids;
  r.fused.triples.resize(test_acoustic.size());
  r.fused.split_tag = "test";
  ParallelFor(kNumDims, jobs, [&](std::size_t d) {
    std::vector<svr::TrainPoint> pts(dev_acoustic.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto &id = dev_acoustic.ids[i];
      pts[i].x = {dev_acoustic.triples[i][d], dev_text.triples[dev_t.at(id)][d]};
      pts[i].y = gold.at(id)[d];
    }
    r.models[d] = svr::TrainSvr(pts, cfg);
    for (std::size_t i = 0; i < test_acoustic.size(); ++i) {
      const std::array<double, 2> x = {test_acoustic.triples[i][d],
                                       test_text.triples[test_t.at(test_acoustic.ids[i])][d]};
      r.fused.triples[i][d] = svr::PredictSvr(r.models[d], x);
    }
  });
  return r;
}

/// Per-dimension test CCC of a prediction set against gold labels.
inline std::array<double, kNumDims> ScorePredictions(const stage1::PredictionSet &p, const GoldMap &gold) {
  TripleSeries pred, ref;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto g = gold.find(p.ids[i]);
    if (g == gold.end()) Fail(ErrorKind::kIdMismatch, "no gold label for '" + p.ids[i] + "'");
    for (std::size_t d = 0; d < kNumDims; ++d) {
      pred[d].push_back(p.triples[i][d]);
      ref[d].push_back(g->second[d]);
    }
  }
  std::array<double, kNumDims> c{};
  for (std::size_t d = 0; d < kNumDims; ++d) c[d] = Ccc(pred[d], ref[d]);
  return c;
}

}  // namespace affuse::pipeline
