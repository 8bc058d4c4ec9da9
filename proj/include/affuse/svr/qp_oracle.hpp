// affuse/svr/qp_oracle.hpp

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
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "affuse/error.hpp"
#include "affuse/svr/kernel.hpp"
#include "affuse/svr/svr.hpp"

namespace affuse::svr {

/// Dense reference solver for small epsilon-SVR duals, independent of the
/// SMO path: accelerated projected gradient over z = [alpha; alpha*] in the
/// box [0, C]^2n intersected with sum(alpha) = sum(alpha*). Intended for
/// verification on at most 50 points. The first-order iterate is then
/// polished: its bound/free pattern fixes a linear KKT system that is solved
/// exactly and kept only if the result is feasible and no worse.
struct QpOracleResult {
  std::vector<double> alpha;
  std::vector<double> alpha_star;
  double bias = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;
};

namespace oracle_internal {

/// Euclidean projection of (u, v) onto {0 <= a, b <= C, sum a = sum b}.
/// With multiplier lambda: a = clip(u - lambda), b = clip(v + lambda); the
/// balance h(lambda) = sum a - sum b is piecewise linear and non-increasing,
/// so the root is found exactly between two sorted breakpoints.
inline void Project(std::span<const double> u, std::span<const double> v, double C,
                    std::span<double> a, std::span<double> b) {
  const std::size_t n = u.size();
  auto clip = [C](double x) { return std::min(C, std::max(0.0, x)); };
  auto h = [&](double lam) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += clip(u[i] - lam) - clip(v[i] + lam);
    return acc;
  };
  std::vector<double> knots;
  knots.reserve(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    knots.push_back(u[i]);
    knots.push_back(u[i] - C);
    knots.push_back(-v[i]);
    knots.push_back(C - v[i]);
  }
  std::sort(knots.begin(), knots.end());
  // h(knots.front()) >= 0 >= h(knots.back()); bisect over knot indices.
  std::size_t lo = 0, hi = knots.size() - 1;
  double hlo = h(knots[lo]), hhi = h(knots[hi]);
  double lam;
  if (hlo <= 0.0) {
    lam = knots[lo];
  } else if (hhi >= 0.0) {
    lam = knots[hi];
  } else {
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      const double hm = h(knots[mid]);
      if (hm > 0.0) {
        lo = mid;
        hlo = hm;
      } else {
        hi = mid;
        hhi = hm;
      }
    }
    lam = hlo == hhi ? knots[lo] : knots[lo] + (knots[hi] - knots[lo]) * hlo / (hlo - hhi);
  }
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = clip(u[i] - lam);
    b[i] = clip(v[i] + lam);
  }
}

struct Polished {
  std::vector<double> alpha, alpha_star;
  double bias = 0.0;
};

/// Fixes duals with |beta| <= tol at 0 and |beta| >= C - tol at +-C, then
/// solves K_FF beta_F + b = y_F - eps sign(beta_F) - K_FB beta_B together
/// with sum(beta) = 0. Returns nothing when there is no free dual or the
/// solution violates a bound, a sign or a tube condition.
inline std::optional<Polished> Polish(const std::vector<double> &K, const std::vector<double> &y,
                                      const std::vector<double> &a, const std::vector<double> &b, double C,
                                      double eps, double tol) {
  const std::size_t n = y.size();
  std::vector<double> beta(n);
  std::vector<int> state(n);  // 0 zero, +-1 free with that sign, +-2 at +-C
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < n; ++i) {
    const double bi = a[i] - b[i];
    if (std::abs(bi) <= tol) {
      state[i] = 0;
      beta[i] = 0.0;
    } else if (std::abs(bi) >= C - tol) {
      state[i] = bi > 0 ? 2 : -2;
      beta[i] = bi > 0 ? C : -C;
    } else {
      state[i] = bi > 0 ? 1 : -1;
      free.push_back(i);
    }
  }
  if (free.empty()) return std::nullopt;
  const auto m = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + 1, m + 1);
  Eigen::VectorXd rhs(m + 1);
  double bound_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (std::abs(state[j]) != 1) bound_sum += beta[j];
  for (Eigen::Index r = 0; r < m; ++r) {
    const std::size_t i = free[r];
    double known = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(state[j]) != 1) known += K[i * n + j] * beta[j];
    for (Eigen::Index c = 0; c < m; ++c) A(r, c) = K[i * n + free[c]];
    A(r, m) = 1.0;
    A(m, r) = 1.0;
    rhs(r) = y[i] - eps * state[i] - known;
  }
  rhs(m) = -bound_sum;
  const Eigen::VectorXd sol = A.fullPivLu().solve(rhs);
  if (!sol.allFinite()) return std::nullopt;
  for (Eigen::Index r = 0; r < m; ++r) {
    const double v = sol(r);
    if (v * state[free[r]] <= 0.0 || std::abs(v) >= C) return std::nullopt;
    beta[free[r]] = v;
  }
  const double bias = sol(m);
  const double slack = 1e-9 * (1.0 + C);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(state[i]) == 1) continue;
    double f = bias;
    for (std::size_t j = 0; j < n; ++j) f += K[i * n + j] * beta[j];
    const double r = y[i] - f;
    if (state[i] == 0 && std::abs(r) > eps + slack) return std::nullopt;
    if (state[i] == 2 && r < eps - slack) return std::nullopt;
    if (state[i] == -2 && r > -eps + slack) return std::nullopt;
  }
  Polished p;
  p.alpha.resize(n);
  p.alpha_star.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.alpha[i] = std::max(beta[i], 0.0);
    p.alpha_star[i] = std::max(-beta[i], 0.0);
  }
  p.bias = bias;
  return p;
}

}  // namespace oracle_internal

inline QpOracleResult QpOracle(std::span<const TrainPoint> points, const SvrConfig &cfg,
                               std::size_t max_iterations = 1000000) {
  ValidateSvrConfig(cfg);
  const std::size_t n = points.size();
  if (n == 0) Fail(ErrorKind::kEmptySplit, "oracle needs at least one point");
  if (n > 50) Fail(ErrorKind::kConfig, "dense QP oracle is limited to 50 points");
  std::vector<std::vector<double>> xs(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = points[i].x;
    y[i] = points[i].y;
  }
  const std::vector<double> K = GramMatrix(xs, cfg.gamma);
  const double C = cfg.c, eps = cfg.epsilon;

  // Lipschitz constant of the gradient: 2 * lambda_max(K), by power iteration
  // padded by 1% for safety.
  double lmax = 1.0;
  {
    std::vector<double> v(n, 1.0), w(n);
    for (int it = 0; it < 500; ++it) {
      double norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.0;
        for (std::size_t j = 0; j < n; ++j) w[i] += K[i * n + j] * v[j];
        norm += w[i] * w[i];
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) break;
      for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
      lmax = norm;
    }
  }
  const double step = 1.0 / (2.0 * lmax * 1.01);

  auto objective = [&](const std::vector<double> &a, const std::vector<double> &b) {
    double quad = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double bi = a[i] - b[i];
      double kb = 0.0;
      for (std::size_t j = 0; j < n; ++j) kb += K[i * n + j] * (a[j] - b[j]);
      quad += bi * kb;
      lin += eps * (a[i] + b[i]) - y[i] * bi;
    }
    return 0.5 * quad + lin;
  };

  std::vector<double> a(n, 0.0), b(n, 0.0), pa(a), pb(b), ya(a), yb(b), u(n), v(n), kb(n);
  double t = 1.0;
  double f_prev = objective(a, b);
  std::size_t it = 0;
  std::size_t still = 0;
  for (; it < max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      kb[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) kb[i] += K[i * n + j] * (ya[j] - yb[j]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = ya[i] - step * (kb[i] + eps - y[i]);
      v[i] = yb[i] - step * (-kb[i] + eps + y[i]);
    }
    pa.swap(a);
    pb.swap(b);
    oracle_internal::Project(u, v, C, a, b);
    const double f = objective(a, b);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      change = std::max({change, std::abs(a[i] - pa[i]), std::abs(b[i] - pb[i])});
    // Function-value restart keeps the accelerated scheme monotone.
    if (f > f_prev) {
      t = 1.0;
      ya = a;
      yb = b;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double mom = (t - 1.0) / t_next;
      for (std::size_t i = 0; i < n; ++i) {
        ya[i] = a[i] + mom * (a[i] - pa[i]);
        yb[i] = b[i] + mom * (b[i] - pb[i]);
      }
      t = t_next;
    }
    f_prev = f;
    still = change <= 1e-15 * std::max(1.0, C) ? still + 1 : 0;
    if (still >= 50) break;
  }

  QpOracleResult r;
  r.iterations = it;
  std::optional<double> polished_bias;
  for (double rel : {1e-9, 1e-7, 1e-5, 1e-3}) {
    auto p = oracle_internal::Polish(K, y, a, b, C, eps, rel * C);
    if (!p) continue;
    if (objective(p->alpha, p->alpha_star) > objective(a, b) + 1e-12 * (1.0 + std::abs(objective(a, b)))) continue;
    a = p->alpha;
    b = p->alpha_star;
    polished_bias = p->bias;
    break;
  }
  r.alpha = a;
  r.alpha_star = b;
  r.objective = objective(a, b);
  if (polished_bias) {
    r.bias = *polished_bias;
    return r;
  }

  // Bias from free duals; otherwise the midpoint of the feasible interval.
  const double free_tol = 1e-9 * C;
  double lo = -std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  std::size_t free = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double f0 = 0.0;
    for (std::size_t j = 0; j < n; ++j) f0 += K[i * n + j] * (a[j] - b[j]);
    const double up = y[i] - eps - f0;  // b value that puts point i on the upper tube edge
    const double dn = y[i] + eps - f0;  // ... on the lower tube edge
    const bool a_free = a[i] > free_tol && a[i] < C - free_tol;
    const bool b_free = b[i] > free_tol && b[i] < C - free_tol;
    if (a_free) { sum += up; ++free; }
    if (b_free) { sum += dn; ++free; }
    if (a_free || b_free) continue;
    // alpha = 0 needs y - f <= eps, i.e. b >= up; alpha = C needs b <= up.
    if (a[i] <= free_tol) lo = std::max(lo, up); else hi = std::min(hi, up);
    // alpha* = 0 needs f - y <= eps, i.e. b <= dn; alpha* = C needs b >= dn.
    if (b[i] <= free_tol) hi = std::min(hi, dn); else lo = std::max(lo, dn);
  }
  r.bias = free > 0 ? sum / static_cast<double>(free) : 0.5 * (lo + hi);
  return r;
}

inline double PredictFromDuals(std::span<const TrainPoint> points, std::span<const double> alpha,
                               std::span<const double> alpha_star, double bias, double gamma,
                               std::span<const double> x) {
  double f = bias;
  for (std::size_t i = 0; i < points.size(); ++i)
    f += (alpha[i] - alpha_star[i]) * RbfKernel(points[i].x, x, gamma);
  return f;
}

}  // namespace affuse::svr
