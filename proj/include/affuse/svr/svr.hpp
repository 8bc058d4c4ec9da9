// affuse/svr/svr.hpp

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
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "affuse/error.hpp"
#include "affuse/svr/kernel.hpp"

namespace affuse::svr {

/// Defaults are the tuned fusion settings: C = 200, gamma = 0.1, eps = 0.01.
struct SvrConfig {
  double c = 200.0;
  double gamma = 0.1;
  double epsilon = 0.01;
  double tolerance = 1e-4;       // stop when the maximal KKT violation falls below this
  std::size_t max_passes = 10000;  // iteration budget = max_passes * number of points
};

inline void ValidateSvrConfig(const SvrConfig &c) {
  if (!(c.c > 0.0) || !(c.gamma > 0.0) || !(c.epsilon >= 0.0) || !(c.tolerance > 0.0) ||
      c.max_passes == 0)
    Fail(ErrorKind::kConfig, "svr config requires C > 0, gamma > 0, epsilon >= 0, tolerance > 0");
}

struct TrainPoint {
  std::vector<double> x;
  double y = 0.0;
};

/// Trained epsilon-SVR: f(x) = sum_i beta_i K(sv_i, x) + bias, with
/// beta_i = alpha_i - alpha_i^*.
struct SvrModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coeffs;
  double bias = 0.0;
  SvrConfig config;
  bool converged = true;
  std::size_t iterations = 0;
  double kkt_gap = 0.0;     // maximal violating-pair gap at exit
  double objective = 0.0;   // dual objective (minimisation form) at exit
};

inline double PredictSvr(const SvrModel &m, std::span<const double> x) {
  double f = m.bias;
  for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
    if (m.support_vectors[i].size() != x.size())
      Fail(ErrorKind::kDimensionMismatch, "model support vectors have dimension " +
                                              std::to_string(m.support_vectors[i].size()) +
                                              ", input has " + std::to_string(x.size()));
    f += m.dual_coeffs[i] * RbfKernel(m.support_vectors[i], x, m.config.gamma);
  }
  return f;
}

/// Full solver state, exposed for verification against the QP oracle.
struct SvrSolution {
  std::vector<double> alpha;       // size n, coefficient of the upper tube constraint
  std::vector<double> alpha_star;  // size n
  double bias = 0.0;
  double objective = 0.0;
  double kkt_gap = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

/// Sequential minimal optimisation over the 2n-variable epsilon-SVR dual
///   min 1/2 (a - a*)' K (a - a*) + eps sum(a + a*) - y'(a - a*)
///   s.t. sum(a - a*) = 0, 0 <= a, a* <= C,
/// with maximal-violating-pair first choice and second-order second choice.
inline SvrSolution SolveSvrDual(std::span<const TrainPoint> points, const SvrConfig &cfg) {
  ValidateSvrConfig(cfg);
  const std::size_t n = points.size();
  if (n == 0) Fail(ErrorKind::kEmptySplit, "svr training needs at least one point");
  const std::size_t dim = points[0].x.size();
  std::vector<std::vector<double>> xs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].x.size() != dim)
      Fail(ErrorKind::kDimensionMismatch, "training points have inconsistent dimensions");
    if (!std::isfinite(points[i].y)) Fail(ErrorKind::kParse, "non-finite svr target");
    xs[i] = points[i].x;
  }
  const std::vector<double> K = GramMatrix(xs, cfg.gamma);

  // Variable t < n is alpha_t (sign +1); t >= n is alpha*_{t-n} (sign -1).
  const std::size_t l = 2 * n;
  const double C = cfg.c;
  constexpr double kTau = 1e-12;
  std::vector<double> a(l, 0.0), G(l), p(l);
  std::vector<int> s(l);
  for (std::size_t t = 0; t < l; ++t) {
    const std::size_t i = t % n;
    s[t] = t < n ? 1 : -1;
    p[t] = t < n ? cfg.epsilon - points[i].y : cfg.epsilon + points[i].y;
    G[t] = p[t];
  }
  auto q = [&](std::size_t t, std::size_t u) {
    return static_cast<double>(s[t] * s[u]) * K[(t % n) * n + (u % n)];
  };
  auto in_up = [&](std::size_t t) { return s[t] > 0 ? a[t] < C : a[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return s[t] > 0 ? a[t] > 0.0 : a[t] < C; };

  SvrSolution sol;
  const std::size_t max_iter = cfg.max_passes * std::max<std::size_t>(n, 1);
  std::size_t iter = 0;
  double gap = 0.0;
  for (;;) {
    // First index: maximal -s_t G_t over I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = l;
    for (std::size_t t = 0; t < l; ++t)
      if (in_up(t) && -s[t] * G[t] >= gmax) {
        gmax = -s[t] * G[t];
        i = t;
      }
    // Second index: best second-order decrease over I_low.
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = l;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < l; ++t) {
      if (!in_low(t)) continue;
      const double v = s[t] * G[t];
      gmax2 = std::max(gmax2, v);
      if (i == l) continue;
      const double grad_diff = gmax + v;
      if (grad_diff <= 0.0) continue;
      const double quad = std::max(K[(i % n) * (n + 1)] + K[(t % n) * (n + 1)] -
                                       2.0 * K[(i % n) * n + (t % n)],
                                   kTau);
      const double obj = -(grad_diff * grad_diff) / quad;
      if (obj <= best) {
        best = obj;
        j = t;
      }
    }
    gap = gmax + gmax2;
    if (i == l || j == l || gap < cfg.tolerance) break;
    if (iter >= max_iter) {
      sol.converged = false;
      break;
    }
    ++iter;

    const double Qij = q(i, j);
    const double Qii = q(i, i), Qjj = q(j, j);
    const double old_i = a[i], old_j = a[j];
    if (s[i] != s[j]) {
      const double quad = std::max(Qii + Qjj + 2.0 * Qij, kTau);
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0.0) {
        if (a[j] < 0.0) { a[j] = 0.0; a[i] = diff; }
      } else {
        if (a[i] < 0.0) { a[i] = 0.0; a[j] = -diff; }
      }
      if (diff > 0.0) {
        if (a[i] > C) { a[i] = C; a[j] = C - diff; }
      } else {
        if (a[j] > C) { a[j] = C; a[i] = C + diff; }
      }
    } else {
      const double quad = std::max(Qii + Qjj - 2.0 * Qij, kTau);
      const double delta = (G[i] - G[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > C) {
        if (a[i] > C) { a[i] = C; a[j] = sum - C; }
      } else {
        if (a[j] < 0.0) { a[j] = 0.0; a[i] = sum; }
      }
      if (sum > C) {
        if (a[j] > C) { a[j] = C; a[i] = sum - C; }
      } else {
        if (a[i] < 0.0) { a[i] = 0.0; a[j] = sum; }
      }
    }
    const double di = a[i] - old_i, dj = a[j] - old_j;
    for (std::size_t t = 0; t < l; ++t) G[t] += q(i, t) * di + q(j, t) * dj;
  }

  // Bias: average over free variables, otherwise the midpoint of the
  // interval allowed by the bound variables.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  std::size_t nr_free = 0;
  for (std::size_t t = 0; t < l; ++t) {
    const double yg = s[t] * G[t];
    if (a[t] >= C) {
      if (s[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (a[t] <= 0.0) {
      if (s[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++nr_free;
      sum_free += yg;
    }
  }
  const double rho = nr_free > 0 ? sum_free / static_cast<double>(nr_free) : (ub + lb) / 2.0;

  sol.alpha.assign(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n));
  sol.alpha_star.assign(a.begin() + static_cast<std::ptrdiff_t>(n), a.end());
  sol.bias = -rho;
  double obj = 0.0;
  for (std::size_t t = 0; t < l; ++t) obj += a[t] * (G[t] + p[t]);
  sol.objective = 0.5 * obj;
  sol.kkt_gap = std::max(gap, 0.0);
  sol.iterations = iter;
  return sol;
}

/// Trains an epsilon-SVR. Does not throw on hitting the iteration budget;
/// the returned model carries converged = false instead.
inline SvrModel TrainSvr(std::span<const TrainPoint> points, const SvrConfig &cfg) {
  const SvrSolution sol = SolveSvrDual(points, cfg);
  SvrModel m;
  m.config = cfg;
  m.bias = sol.bias;
  m.converged = sol.converged;
  m.iterations = sol.iterations;
  m.kkt_gap = sol.kkt_gap;
  m.objective = sol.objective;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double beta = sol.alpha[i] - sol.alpha_star[i];
    if (beta != 0.0) {
      m.support_vectors.push_back(points[i].x);
      m.dual_coeffs.push_back(beta);
    }
  }
  return m;
}

/// Largest violation of the epsilon-SVR optimality conditions on the
/// training set, in target units. Uses only the model's duals and bias:
///   beta = 0        -> |y - f| <= eps
///   0 < beta < C    -> y - f = eps        (upper tube, free)
///   -C < beta < 0   -> f - y = eps        (lower tube, free)
///   beta = +-C      -> point on or outside the respective tube edge
inline double KktResidual(const SvrModel &m, std::span<const TrainPoint> points) {
  const double C = m.config.c, eps = m.config.epsilon;
  double worst = 0.0;
  for (const auto &pt : points) {
    double beta = 0.0;
    for (std::size_t k = 0; k < m.support_vectors.size(); ++k)
      if (m.support_vectors[k] == pt.x) beta = m.dual_coeffs[k];
    const double r = pt.y - PredictSvr(m, pt.x);  // residual
    double v = 0.0;
    if (beta == 0.0) v = std::max(0.0, std::abs(r) - eps);
    else if (beta >= C) v = std::max(0.0, eps - r);
    else if (beta <= -C) v = std::max(0.0, eps + r);
    else if (beta > 0.0) v = std::abs(r - eps);
    else v = std::abs(r + eps);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace affuse::svr
