// tests/acceptance_test.cpp

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

// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
// below. Exit status is non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "affuse/cli.hpp"
#include "affuse/dsp/framing.hpp"
#include "affuse/dsp/lld.hpp"
#include "affuse/metrics.hpp"
#include "affuse/pipeline/labels.hpp"
#include "affuse/pipeline/mtl_search.hpp"
#include "affuse/pipeline/report.hpp"
#include "affuse/pipeline/split.hpp"
#include "affuse/pipeline/stats.hpp"
#include "affuse/stage1/mtl_grad.hpp"
#include "affuse/svr/qp_oracle.hpp"
#include "affuse/svr/svr.hpp"
#include "grad_check.hpp"
#include "pipeline_fixtures.hpp"

namespace {

using namespace affuse;
namespace fs = std::filesystem;

// Pinned tolerances and budgets.
constexpr double kCccSelfTol = 1e-12;
constexpr double kCccOracleTol = 1e-12;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradStep = 1e-5;
constexpr double kSvrObjectiveRelTol = 1e-6;
constexpr double kSvrPredictionTol = 1e-5;
constexpr double kSvrSmoTolerance = 1e-9;
constexpr double kSilenceTarget = 0.5, kSilenceTol = 0.02;
constexpr double kF0Target = 440.0, kF0Tol = 5.0;
constexpr double kLabelRoundTripTol = 1e-12;
constexpr double kSplitSizeTol = 1.0;
constexpr double kPlantedAlphaMin = 0.8;
constexpr double kBestPairImprovementMin = 5.0;  // percent
constexpr double kTTestT = 4.472, kTTestTTol = 0.001;
constexpr double kTTestP = 2.5e-4, kTTestPRelTol = 0.10;
constexpr double kBudget1 = 5, kBudget2 = 10, kBudget3 = 60, kBudget4 = 30, kBudget7 = 600;

struct Verdict {
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string &what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string Fmt(const char *f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Textbook CCC from rho * sigma_x * sigma_y with population moments.
double ReferenceCcc(const std::vector<double> &x, const std::vector<double> &y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx) / n;
    syy += (y[i] - my) * (y[i] - my) / n;
    sxy += (x[i] - mx) * (y[i] - my) / n;
  }
  const double rho = sxy / std::sqrt(sxx * syy);
  return 2 * rho * std::sqrt(sxx) * std::sqrt(syy) / (sxx + syy + (mx - my) * (mx - my));
}

Verdict MetricSuite() {
  Verdict v;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len(2, 512);
  std::normal_distribution<double> nd;
  double worst_oracle = 0.0, worst_self = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = len(rng);
    std::vector<double> x(n), y(n);
    const double scale = std::exp(nd(rng));
    const double mix = nd(rng);
    for (int i = 0; i < n; ++i) {
      x[i] = scale * nd(rng) + nd(rng);
      y[i] = mix * x[i] + nd(rng);
    }
    const double c = Ccc(x, y), p = Pearson(x, y), l = CccLoss(x, y);
    worst_oracle = std::max(worst_oracle, std::abs(c - ReferenceCcc(x, y)));
    worst_self = std::max(worst_self, std::abs(Ccc(x, x) - 1.0));
    v.Require(c == Ccc(y, x), "ccc not symmetric");
    v.Require(c >= -1.0 && c <= 1.0, "ccc outside [-1, 1]");
    v.Require(std::abs(c) <= std::abs(p) + 1e-12, "|ccc| > |pearson|");
    v.Require(l >= 0.0 && l <= 2.0 && l == 1.0 - c, "ccc_loss outside [0, 2] or not 1 - ccc");
  }
  v.Require(worst_oracle <= kCccOracleTol, Fmt("ccc vs oracle off by %.3g", worst_oracle));
  v.Require(worst_self <= kCccSelfTol, Fmt("ccc(x,x) off by %.3g", worst_self));
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(64);
    for (double &e : x) e = nd(rng);
    double shift = nd(rng);
    if (shift == 0.0) shift = 1.0;
    std::vector<double> y = x;
    for (double &e : y) e += shift;
    v.Require(Ccc(x, y) < 1.0 && std::abs(Pearson(x, y) - 1.0) < 1e-12, "shift not penalised");
  }
  if (v.pass) v.detail = Fmt("1000 series, ccc vs oracle max err %.2g, ccc(x,x) max err %.2g", worst_oracle, worst_self);
  return v;
}

Verdict GradientCheck() {
  Verdict v;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0, 1);
  std::uniform_int_distribution<int> len(8, 64);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = len(rng);
    TripleSeries pred, gold;
    for (std::size_t d = 0; d < kNumDims; ++d) {
      pred[d].resize(n);
      gold[d].resize(n);
      for (int i = 0; i < n; ++i) {
        gold[d][i] = std::tanh(nd(rng));
        pred[d][i] = 0.5 * gold[d][i] + 0.4 * nd(rng);
      }
    }
    double a = ud(rng), b = ud(rng);
    if (a + b > 1.0) {
      a = 1.0 - a;
      b = 1.0 - b;
    }
    const MtlWeights w{a, b};
    const double err = testing::MaxRelativeError(stage1::MtlGradient(pred, gold, w),
                                                 testing::NumericMtlGradient(pred, gold, w, kGradStep));
    worst = std::max(worst, err);
  }
  v.Require(worst < kGradRelTol, Fmt("max relative error %.3g", worst));
  if (v.pass) v.detail = Fmt("20 batches, max relative error %.2g", worst);
  return v;
}

Verdict SvrVsOracle() {
  Verdict v;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> n_dist(2, 20), d_dist(1, 3);
  double worst_obj = 0.0, worst_pred = 0.0, worst_kkt = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const int n = n_dist(rng), dim = d_dist(rng);
    std::vector<svr::TrainPoint> pts(n);
    for (auto &p : pts) {
      p.x.resize(dim);
      for (double &e : p.x) e = nd(rng);
      p.y = std::tanh(0.7 * p.x[0] + 0.3 * nd(rng));
    }
    svr::SvrConfig cfg;
    cfg.c = inst % 2 ? 1.0 : 200.0;
    cfg.gamma = (inst / 2) % 2 ? 0.1 : 1.0;
    cfg.epsilon = 0.01;
    cfg.tolerance = kSvrSmoTolerance;
    const svr::SvrSolution s = svr::SolveSvrDual(pts, cfg);
    const svr::SvrModel m = svr::TrainSvr(pts, cfg);
    const svr::QpOracleResult o = svr::QpOracle(pts, cfg);
    const double rel = std::abs(s.objective - o.objective) / std::max(std::abs(o.objective), 1e-300);
    worst_obj = std::max(worst_obj, rel);
    std::vector<std::vector<double>> probes;
    for (const auto &p : pts) probes.push_back(p.x);
    for (int k = 0; k < 20; ++k) {
      std::vector<double> x(dim);
      for (double &e : x) e = 1.5 * nd(rng);
      probes.push_back(x);
    }
    for (const auto &x : probes)
      worst_pred = std::max(worst_pred, std::abs(svr::PredictSvr(m, x) -
                                                 svr::PredictFromDuals(pts, o.alpha, o.alpha_star, o.bias,
                                                                       cfg.gamma, x)));
    v.Require(m.converged, "SMO did not converge");
    const double kkt = svr::KktResidual(m, pts);
    worst_kkt = std::max(worst_kkt, kkt);
    v.Require(kkt <= cfg.tolerance, Fmt("KKT residual %.3g above tolerance", kkt));
  }
  v.Require(worst_obj <= kSvrObjectiveRelTol, Fmt("objective relative gap %.3g", worst_obj));
  v.Require(worst_pred <= kSvrPredictionTol, Fmt("prediction gap %.3g", worst_pred));
  if (v.pass)
    v.detail = Fmt("50 instances, objective rel gap %.2g, prediction gap %.2g, KKT %.2g", worst_obj, worst_pred,
                   worst_kkt);
  return v;
}

dsp::Waveform Sine(double hz, double seconds, double amp) {
  dsp::Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(static_cast<std::size_t>(seconds * w.sample_rate));
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = amp * std::sin(2 * std::numbers::pi * hz * static_cast<double>(i) / w.sample_rate);
  return w;
}

Verdict DspSuite() {
  Verdict v;
  dsp::Waveform half = Sine(200, 2.0, 1.0);
  std::fill(half.samples.begin(), half.samples.begin() + half.samples.size() / 2, 0.0);
  const double silence = dsp::SilenceRatio(half, dsp::FrameConfig{});
  v.Require(std::abs(silence - kSilenceTarget) <= kSilenceTol, Fmt("silence ratio %.4f", silence));

  const auto u = dsp::ExtractUtterance(Sine(440, 1.0, 0.5), dsp::FrameConfig{});
  double worst_f0 = 0.0;
  for (std::size_t f = 0; f < u.llds.frames; ++f) worst_f0 = std::max(worst_f0, std::abs(u.llds.at(f, dsp::kF0) - kF0Target));
  v.Require(u.llds.frames > 0 && worst_f0 <= kF0Tol, Fmt("F0 off by %.2f Hz", worst_f0));

  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> win(1, 800), extra(0, 20000);
  for (int c = 0; c < 200; ++c) {
    const std::size_t window = win(rng);
    const std::size_t hop = std::uniform_int_distribution<std::size_t>(1, window)(rng);
    const std::size_t n = window + extra(rng);
    std::size_t brute = 0;
    for (std::size_t s = 0; s + window <= n; s += hop) ++brute;
    v.Require(dsp::FrameCount(n, window, hop) == brute, "frame count mismatch");
  }

  std::uniform_real_distribution<double> ud(-1, 1);
  std::size_t finite_checked = 0;
  for (int t = 0; t < 100; ++t) {
    dsp::Waveform w;
    w.samples.resize(400 + rng() % 8000);
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
      double x = ud(rng);
      if (t % 4 == 1) x *= 1e-9;
      if (t % 4 == 2) x = (i / 500) % 2 ? 0.0 : x;
      if (t % 4 == 3) x = 0.9 * std::sin(0.05 * static_cast<double>(i));
      w.samples[i] = x;
    }
    const auto lld = dsp::ExtractUtterance(w, dsp::FrameConfig{});
    for (double x : lld.llds.data) v.Require(std::isfinite(x), "non-finite LLD");
    if (lld.llds.frames >= 2)
      for (double x : dsp::Functionals(lld.llds, lld.silence_ratio).values) v.Require(std::isfinite(x), "non-finite functional");
    ++finite_checked;
  }
  if (v.pass)
    v.detail = Fmt("silence %.4f, F0 max err %.2f Hz, 200 frame counts, %.0f random waveforms finite", silence,
                   worst_f0, double(finite_checked));
  return v;
}

Verdict LabelSplitSuite() {
  Verdict v;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> raw(1.0, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double r = raw(rng);
    worst = std::max(worst, std::abs(pipeline::UnscaleLabel(pipeline::ScaleLabel(r)) - r));
  }
  v.Require(worst < kLabelRoundTripTol, Fmt("label round trip error %.3g", worst));

  std::size_t sizes = 0;
  double worst_dev = 0.0;
  auto check_size = [&](std::size_t n) {
    const auto m = testing::RandomManifest(n, 5, n);
    const auto p = pipeline::MakeSplit(m, pipeline::SplitMode::kSd, {}, n + 1);
    const double dn = static_cast<double>(n);
    for (const auto &[got, frac] : {std::pair{p.train_ids.size(), 0.64}, {p.dev_ids.size(), 0.16},
                                    {p.test_ids.size(), 0.20}})
      worst_dev = std::max(worst_dev, std::abs(static_cast<double>(got) - frac * dn));
    v.Require(p.train_ids.size() + p.dev_ids.size() + p.test_ids.size() == n, "split loses rows");
    ++sizes;
  };
  for (std::size_t n = 100; n <= 1000; ++n) check_size(n);
  for (std::size_t n = 1010; n <= 10000; n += 10) check_size(n);
  v.Require(worst_dev <= kSplitSizeTol, Fmt("SD split size off by %.1f", worst_dev));

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = testing::RandomManifest(100 + 37 * seed, 2 + seed % 6, 1000 + seed);
    const std::string held = "S" + std::to_string(seed % (2 + seed % 6));
    const auto p = pipeline::MakeSplit(m, pipeline::SplitMode::kLoso, {held}, seed);
    const auto idx = m.IndexById();
    std::set<std::string> test_speakers;
    for (const auto &id : p.test_ids) test_speakers.insert(m.rows[idx.at(id)].speaker_id);
    for (const auto *part : {&p.train_ids, &p.dev_ids})
      for (const auto &id : *part)
        v.Require(!test_speakers.count(m.rows[idx.at(id)].speaker_id), "LOSO speaker leak");
  }
  if (v.pass)
    v.detail = Fmt("round trip err %.2g, %.0f SD sizes within %.1f, 50 LOSO manifests disjoint", worst,
                   double(sizes), worst_dev);
  return v;
}

Verdict GridSearchSuite() {
  Verdict v;
  const auto grid = pipeline::MtlGrid();
  v.Require(grid.size() == 66, "grid has " + std::to_string(grid.size()) + " points");
  std::string alphas;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto r = pipeline::MtlGridSearch(testing::PlantedValence(200, 2 * seed + 1),
                                           testing::PlantedValence(200, 2 * seed + 2),
                                           testing::PlantedValenceNet(seed), 2);
    v.Require(r.cells.size() == 66, "search evaluated " + std::to_string(r.cells.size()) + " cells");
    v.Require(r.best.alpha >= kPlantedAlphaMin - 1e-12, Fmt("planted search chose alpha %.1f", r.best.alpha));
    alphas += (seed ? ", " : "") + Fmt("%.1f", r.best.alpha);
  }
  if (v.pass) v.detail = "66 cells; planted valence picks alpha " + alphas;
  return v;
}

Verdict TTestSuite() {
  Verdict v;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  std::vector<double> z(20);
  for (double &e : z) e = nd(rng);
  double mean = 0.0, ss = 0.0;
  for (double e : z) mean += e / 20.0;
  for (double e : z) ss += (e - mean) * (e - mean);
  const double sd = std::sqrt(ss / 19.0);
  std::vector<double> a(20), b(20, 0.0);
  for (int i = 0; i < 20; ++i) a[i] = 1.0 + (z[i] - mean) / sd;
  const auto r = pipeline::PairedTTest(a, b);
  v.Require(std::abs(r.t_stat - kTTestT) <= kTTestTTol, Fmt("t = %.5f", r.t_stat));
  v.Require(std::abs(r.p_value - kTTestP) <= kTTestPRelTol * kTTestP, Fmt("p = %.4g", r.p_value));
  const double oracle = testing::StudentTTwoTailedP(r.t_stat, 19.0);
  v.Require(std::abs(r.p_value - oracle) <= 1e-9, Fmt("p %.6g vs integration oracle %.6g", r.p_value, oracle));
  const auto same = pipeline::PairedTTest(a, a);
  v.Require(same.p_value == 1.0 && same.t_stat == 0.0, "identical series do not give p = 1");
  if (v.pass) v.detail = Fmt("t = %.4f, p = %.3g (oracle %.3g), identical series p = 1", r.t_stat, r.p_value, oracle);
  return v;
}

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int Cli(std::vector<std::string> args, std::string *err_out = nullptr) {
  args.insert(args.begin(), "affuse");
  std::vector<const char *> argv;
  for (const auto &s : args) argv.push_back(s.c_str());
  std::ostringstream out, err;
  const int code = cli::Main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_out) *err_out = err.str();
  return code;
}

struct EndToEnd {
  Verdict fusion, determinism;
  double seconds = 0.0, rerun_seconds = 0.0;
};

EndToEnd SyntheticRuns() {
  EndToEnd e;
  const fs::path dir = fs::temp_directory_path() / "affuse_acceptance";
  fs::remove_all(dir);
  const auto t0 = std::chrono::steady_clock::now();
  std::string err;
  int code = Cli({"synth-data", "--out", dir.string(), "--seed", "0"}, &err);
  e.fusion.Require(code == 0, "synth-data failed: " + err);
  if (code == 0) {
    code = Cli({"run", "--config", (dir / "experiment.cfg").string(), "--quiet"}, &err);
    e.fusion.Require(code == 0, "run exited " + std::to_string(code) + ": " + err);
  }
  e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const fs::path report = dir / "run" / "synthetic" / "report.json";
  const std::string first = Slurp(report);
  if (e.fusion.pass) {
    const auto r = pipeline::ReportFromJson(first);
    std::size_t improved = 0;
    double best = -1e300, worst = 1e300;
    for (const auto &f : r.fused) {
      const double imp = f.relative_improvement.value_or(-1e300);
      improved += imp > 0.0 ? 1 : 0;
      best = std::max(best, imp);
      worst = std::min(worst, imp);
    }
    e.fusion.Require(r.fused.size() == 9, std::to_string(r.fused.size()) + " fused pairs");
    e.fusion.Require(improved == 9, std::to_string(improved) + "/9 pairs improved");
    e.fusion.Require(best > kBestPairImprovementMin, Fmt("best pair improved only %.2f%%", best));
    e.fusion.Require(e.seconds < kBudget7, Fmt("took %.0f s", e.seconds));
    if (e.fusion.pass)
      e.fusion.detail = Fmt("9/9 pairs improved, %.2f%% to %.2f%%", worst, best) + Fmt(", %.0f s", e.seconds);
  }

  e.determinism.Require(!first.empty(), "first run produced no report");
  if (e.determinism.pass) {
    const auto t1 = std::chrono::steady_clock::now();
    code = Cli({"run", "--config", (dir / "experiment.cfg").string(), "--quiet"}, &err);
    e.determinism.Require(code == 0, "second run exited " + std::to_string(code) + ": " + err);
    e.rerun_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
    const std::string second = Slurp(report);
    e.determinism.Require(first == second, "report.json differs between runs");
    if (e.determinism.pass) e.determinism.detail = std::to_string(first.size()) + " bytes identical across two runs";
  }
  fs::remove_all(dir);
  return e;
}

int Report(int id, const std::string &name, const Verdict &v, double seconds) {
  std::printf("%s  [%d] %-28s %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str(),
              seconds);
  std::fflush(stdout);
  return v.pass ? 0 : 1;
}

int Timed(int id, const std::string &name, double budget, const std::function<Verdict()> &f) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = f();
  } catch (const std::exception &e) {
    v.Require(false, std::string("threw: ") + e.what());
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget > 0) v.Require(s < budget, Fmt("over the %.0f s budget", budget));
  return Report(id, name, v, s);
}

}  // namespace

int main() {
  int failures = 0;
  failures += Timed(1, "metric suite", kBudget1, MetricSuite);
  failures += Timed(2, "gradient check", kBudget2, GradientCheck);
  failures += Timed(3, "svr vs oracle", kBudget3, SvrVsOracle);
  failures += Timed(4, "dsp suite", kBudget4, DspSuite);
  failures += Timed(5, "labels and splits", 0, LabelSplitSuite);
  failures += Timed(6, "loss-weight grid search", 0, GridSearchSuite);
  EndToEnd e;
  try {
    e = SyntheticRuns();
  } catch (const std::exception &ex) {
    e.fusion.Require(false, std::string("threw: ") + ex.what());
    e.determinism.Require(false, "no runs");
  }
  failures += Report(7, "synthetic end-to-end fusion", e.fusion, e.seconds);
  failures += Timed(8, "paired t-test", 0, TTestSuite);
  failures += Report(9, "run determinism", e.determinism, e.rerun_seconds);
  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
