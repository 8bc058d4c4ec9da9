// affuse/pipeline/stats.hpp

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
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "affuse/error.hpp"

namespace affuse::pipeline {

/// Percentage gain of the fused mean CCC over the best single modality.
inline double RelativeImprovement(double fused_mean, double best_single_mean) {
  if (!(best_single_mean > 0.0))
    Fail(ErrorKind::kNonPositiveBaseline,
         "relative improvement needs a positive baseline, got " + std::to_string(best_single_mean));
  return 100.0 * (fused_mean - best_single_mean) / best_single_mean;
}

struct ImprovementStats {
  double average = 0.0;
  double max = 0.0;
  double min = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t count = 0;
};

inline ImprovementStats Summarize(std::span<const double> values) {
  if (values.empty()) Fail(ErrorKind::kDegenerateInput, "no values to summarize");
  ImprovementStats s;
  s.count = values.size();
  s.max = *std::max_element(values.begin(), values.end());
  s.min = *std::min_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.average = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.average) * (v - s.average);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

struct TTestResult {
  double t_stat = 0.0;
  double p_value = 1.0;
  std::size_t df = 0;
  bool significant = false;
};

/// Two-tailed paired t-test on d = a - b with n - 1 degrees of freedom.
/// Identical series give t = 0, p = 1; constant non-zero differences have
/// no defined statistic.
inline TTestResult PairedTTest(std::span<const double> a, std::span<const double> b,
                               double p_threshold = 0.05) {
  if (a.size() != b.size())
    Fail(ErrorKind::kShapeMismatch, "paired t-test needs equal lengths, got " +
                                        std::to_string(a.size()) + " and " + std::to_string(b.size()));
  const std::size_t n = a.size();
  if (n < 2) Fail(ErrorKind::kDegenerateInput, "paired t-test needs at least 2 pairs");
  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = a[i] - b[i];
    if (!std::isfinite(d[i])) Fail(ErrorKind::kDegenerateInput, "non-finite value in t-test input");
    mean += d[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  TTestResult r;
  r.df = n - 1;
  if (ss == 0.0) {
    if (mean == 0.0) return r;
    Fail(ErrorKind::kDegenerateDifferences, "paired differences are constant and non-zero");
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  r.t_stat = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(r.df));
  r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t_stat))));
  r.significant = r.p_value < p_threshold;
  return r;
}

}  // namespace affuse::pipeline
