// affuse/pipeline/mtl_search.hpp

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

#include <array>
#include <optional>
#include <vector>

#include "affuse/metrics.hpp"
#include "affuse/pipeline/parallel.hpp"
#include "affuse/pipeline/stage1_runner.hpp"
#include "affuse/stage1/trainer.hpp"

namespace affuse::pipeline {

inline constexpr int kMtlGridSteps = 10;  // weights move in steps of 0.1

/// Every (alpha, beta) on the 0.1 lattice with alpha + beta <= 1, ordered by
/// alpha then beta. Built from integers so 0.1 steps never drift.
inline std::vector<MtlWeights> MtlGrid() {
  std::vector<MtlWeights> g;
  for (int i = 0; i <= kMtlGridSteps; ++i)
    for (int j = 0; i + j <= kMtlGridSteps; ++j)
      g.push_back({static_cast<double>(i) / kMtlGridSteps, static_cast<double>(j) / kMtlGridSteps});
  return g;
}

struct MtlCell {
  MtlWeights weights;
  std::array<double, kNumDims> dev_ccc{};
  double dev_mean_ccc = 0.0;
  std::size_t best_epoch = 0;
};

struct MtlSearchResult {
  MtlWeights best;
  double best_dev_mean_ccc = 0.0;
  std::size_t best_index = 0;
  std::vector<MtlCell> cells;
  std::optional<stage1::TrainResult> best_model;
};

/// Trains one network per grid cell and keeps the highest development mean
/// CCC. Ties go to the smaller alpha, then the smaller beta.
inline MtlSearchResult MtlGridSearch(const stage1::Samples &train, const stage1::Samples &dev,
                                     const stage1::NetConfig &cfg, std::size_t jobs = 1) {
  const auto grid = MtlGrid();
  std::vector<std::optional<stage1::TrainResult>> models(grid.size());
  std::vector<MtlCell> cells(grid.size());
  ParallelFor(grid.size(), jobs, [&](std::size_t k) {
    auto res = stage1::Train(train, dev, cfg, grid[k]);
    cells[k].weights = grid[k];
    cells[k].dev_mean_ccc = DevMeanCcc(res.model, dev, &cells[k].dev_ccc);
    cells[k].best_epoch = res.best_epoch;
    models[k] = std::move(res);
  });
  MtlSearchResult r;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k == 0 || cells[k].dev_mean_ccc > r.best_dev_mean_ccc) {
      r.best_index = k;
      r.best_dev_mean_ccc = cells[k].dev_mean_ccc;
    }
  }
  r.best = grid[r.best_index];
  r.best_model = std::move(models[r.best_index]);
  r.cells = std::move(cells);
  return r;
}

}  // namespace affuse::pipeline
