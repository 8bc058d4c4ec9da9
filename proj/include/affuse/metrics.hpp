// affuse/metrics.hpp

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
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "affuse/error.hpp"

namespace affuse {

inline constexpr std::size_t kNumDims = 3;

enum class Dim : std::size_t { kValence = 0, kArousal = 1, kDominance = 2 };

inline constexpr std::array<const char *, kNumDims> kDimNames = {
    "valence", "arousal", "dominance"};

/// Valence, arousal and dominance scores. Used both for gold labels (after
/// scaling to [-1,1]) and for predictions.
struct EmotionTriple {
  std::array<double, kNumDims> v{};

  double &operator[](std::size_t d) { return v[d]; }
  double operator[](std::size_t d) const { return v[d]; }
  double valence() const { return v[0]; }
  double arousal() const { return v[1]; }
  double dominance() const { return v[2]; }
  bool operator==(const EmotionTriple &) const = default;
};

/// Per-dimension series of scores, stored column-wise.
using TripleSeries = std::array<std::vector<double>, kNumDims>;

inline TripleSeries ToColumns(std::span<const EmotionTriple> rows) {
  TripleSeries cols;
  for (std::size_t d = 0; d < kNumDims; ++d) {
    cols[d].reserve(rows.size());
    for (const auto &r : rows) cols[d].push_back(r[d]);
  }
  return cols;
}

/// Multitask loss weights. Dominance receives 1 - alpha - beta.
struct MtlWeights {
  double alpha = 1.0 / 3.0;
  double beta = 1.0 / 3.0;

  double dominance() const { return 1.0 - alpha - beta; }
  std::array<double, kNumDims> AsArray() const {
    return {alpha, beta, dominance()};
  }
};

inline void ValidateWeights(const MtlWeights &w) {
  // 1e-12 slack admits grid points such as 0.7 + 0.3 that land a hair above 1.
  if (!(w.alpha >= 0.0) || !(w.beta >= 0.0) || !(w.alpha <= 1.0) ||
      !(w.beta <= 1.0) || w.alpha + w.beta > 1.0 + 1e-12) {
    Fail(ErrorKind::kInvalidWeights,
         "multitask weights require alpha, beta >= 0 and alpha + beta <= 1 "
         "(got alpha=" + std::to_string(w.alpha) +
             ", beta=" + std::to_string(w.beta) + ")");
  }
}

/// Population moments of a pair of series, accumulated in double.
struct PairMoments {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  double cov = 0.0;
  std::size_t n = 0;
};

inline PairMoments ComputeMoments(std::span<const double> x,
                                  std::span<const double> y) {
  if (x.size() != y.size())
    Fail(ErrorKind::kShapeMismatch, "series lengths differ (" +
                                        std::to_string(x.size()) + " vs " +
                                        std::to_string(y.size()) + ")");
  if (x.size() < 2)
    Fail(ErrorKind::kDegenerateInput, "correlation needs at least 2 samples");
  PairMoments m;
  m.n = x.size();
  const double n = static_cast<double>(m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    m.mean_x += x[i];
    m.mean_y += y[i];
  }
  m.mean_x /= n;
  m.mean_y /= n;
  // Two-pass: deviations from the mean avoid the E[x^2]-E[x]^2 cancellation.
  for (std::size_t i = 0; i < m.n; ++i) {
    const double dx = x[i] - m.mean_x;
    const double dy = y[i] - m.mean_y;
    m.var_x += dx * dx;
    m.var_y += dy * dy;
    m.cov += dx * dy;
  }
  m.var_x /= n;
  m.var_y /= n;
  m.cov /= n;
  return m;
}

/// Pearson correlation coefficient. Throws ZeroVariance when either series
/// is constant.
inline double Pearson(std::span<const double> x, std::span<const double> y) {
  const PairMoments m = ComputeMoments(x, y);
  if (m.var_x <= 0.0 || m.var_y <= 0.0)
    Fail(ErrorKind::kZeroVariance, "pearson undefined for a constant series");
  double r = m.cov / std::sqrt(m.var_x * m.var_y);
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return r;
}

/// Concordance correlation coefficient in covariance form,
///   2 cov(x,y) / (var x + var y + (mean x - mean y)^2),
/// with population (1/N) moments. A constant series scores 0 instead of
/// failing; only the fully degenerate case (both constant, same mean) throws.
inline double Ccc(std::span<const double> x, std::span<const double> y) {
  const PairMoments m = ComputeMoments(x, y);
  const double shift = m.mean_x - m.mean_y;
  const double denom = m.var_x + m.var_y + shift * shift;
  if (!(denom > 0.0))
    Fail(ErrorKind::kDegenerateInput,
         "ccc denominator is zero (both series constant with equal mean)");
  double c = 2.0 * m.cov / denom;
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return c;
}

inline double CccLoss(std::span<const double> x, std::span<const double> y) {
  return 1.0 - Ccc(x, y);
}

/// alpha * CCCL_V + beta * CCCL_A + (1 - alpha - beta) * CCCL_D.
inline double MtlLoss(const TripleSeries &pred, const TripleSeries &gold,
                      const MtlWeights &w) {
  ValidateWeights(w);
  const auto weights = w.AsArray();
  const std::size_t n = pred[0].size();
  for (std::size_t d = 0; d < kNumDims; ++d) {
    if (pred[d].size() != n || gold[d].size() != n)
      Fail(ErrorKind::kShapeMismatch, "mtl_loss series lengths differ");
  }
  double total = 0.0;
  for (std::size_t d = 0; d < kNumDims; ++d)
    total += weights[d] * CccLoss(pred[d], gold[d]);
  return total;
}

inline double MeanCcc(const std::array<double, kNumDims> &per_dim) {
  return (per_dim[0] + per_dim[1] + per_dim[2]) / 3.0;
}

/// Per-dimension CCC over whole series (no per-session averaging).
inline std::array<double, kNumDims> CccPerDim(const TripleSeries &pred,
                                              const TripleSeries &gold) {
  std::array<double, kNumDims> out{};
  for (std::size_t d = 0; d < kNumDims; ++d) out[d] = Ccc(pred[d], gold[d]);
  return out;
}

}  // namespace affuse
