// affuse/svr/grid_search.hpp

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

#include <span>
#include <vector>

#include "affuse/error.hpp"
#include "affuse/metrics.hpp"
#include "affuse/svr/svr.hpp"

namespace affuse::svr {

inline const std::vector<double> kGridC = {1e-2, 1.0, 1e2, 2e2, 3e2};
inline const std::vector<double> kGridGamma = {1e-2, 1e-1, 1.0, 10.0, 1e2};

struct GridCell {
  double c = 0.0;
  double gamma = 0.0;
  double ccc = 0.0;
  bool valid = false;  // false when validation predictions were constant
};

struct GridResult {
  SvrConfig best;
  double best_ccc = 0.0;
  std::vector<GridCell> cells;  // row-major over (C, gamma)
};

/// Exhaustive search over (C, gamma), scored by validation CCC. Ties keep
/// the earlier cell, i.e. smaller C first, then smaller gamma.
inline GridResult SvrGridSearch(std::span<const TrainPoint> train, std::span<const TrainPoint> val,
                                SvrConfig base = {}, std::span<const double> cs = kGridC,
                                std::span<const double> gammas = kGridGamma) {
  if (val.size() < 2) Fail(ErrorKind::kEmptySplit, "svr grid search needs at least 2 validation points");
  std::vector<double> gold(val.size());
  for (std::size_t i = 0; i < val.size(); ++i) gold[i] = val[i].y;
  GridResult r;
  bool any = false;
  for (double c : cs) {
    for (double g : gammas) {
      SvrConfig cfg = base;
      cfg.c = c;
      cfg.gamma = g;
      const SvrModel m = TrainSvr(train, cfg);
      std::vector<double> pred(val.size());
      for (std::size_t i = 0; i < val.size(); ++i) pred[i] = PredictSvr(m, val[i].x);
      GridCell cell{c, g, 0.0, false};
      try {
        cell.ccc = Ccc(pred, gold);
        cell.valid = true;
      } catch (const Error &) {
      }
      r.cells.push_back(cell);
      if (cell.valid && (!any || cell.ccc > r.best_ccc)) {
        any = true;
        r.best = cfg;
        r.best_ccc = cell.ccc;
      }
    }
  }
  if (!any) Fail(ErrorKind::kDegenerate, "every svr grid cell produced constant validation predictions");
  return r;
}

}  // namespace affuse::svr
