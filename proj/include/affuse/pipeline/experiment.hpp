// affuse/pipeline/experiment.hpp

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

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "affuse/error.hpp"
#include "affuse/pipeline/config.hpp"
#include "affuse/pipeline/extraction.hpp"
#include "affuse/pipeline/fusion.hpp"
#include "affuse/pipeline/manifest.hpp"
#include "affuse/pipeline/modality.hpp"
#include "affuse/pipeline/report.hpp"
#include "affuse/pipeline/split.hpp"
#include "affuse/stage1/model_io.hpp"
#include "affuse/stage1/text_features.hpp"
#include "affuse/svr/model_io.hpp"

namespace affuse::pipeline {

inline constexpr const char *kStages[] = {"manifest", "extract", "split", "stage1", "fuse", "report"};

/// Human-readable plan for a configuration, without touching any data.
inline std::string DescribePlan(const ExperimentConfig &c) {
  std::ostringstream os;
  os << "run directory: " << c.RunDir().string() << "\n";
  os << "manifest:      " << c.dataset.string() << "\n";
  os << "stages:        ";
  for (std::size_t i = 0; i < std::size(kStages); ++i) os << (i ? " -> " : "") << kStages[i];
  os << "\n";
  os << "stage-1 models: " << c.acoustic_features.size() + c.text_features.size()
     << (c.mtl_search ? " (66-point loss-weight search each)" : "") << "\n";
  os << "fused pairs:   " << c.acoustic_features.size() * c.text_features.size() << "\n";
  os << "jobs:          " << c.jobs << "\n";
  os << "settings:\n";
  for (const auto &[k, v] : ResolvedSettings(c)) os << "  " << k << " = " << v << "\n";
  return os.str();
}

namespace experiment_internal {

template <typename F>
auto Stage(const char *name, F &&f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error &e) {
    Fail(e.kind(), std::string("stage ") + name + ": " + e.detail());
  }
}

inline std::string Timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::uint64_t ModelSeed(std::uint64_t seed, const std::string &system) {
  return seed ^ stage1::Fnv1a(system);
}

inline void WriteText(const std::filesystem::path &p, const std::string &s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + p.string());
  out << s;
  if (!out) Fail(ErrorKind::kIo, "write failed for " + p.string());
}

}  // namespace experiment_internal

/// Runs manifest -> extract -> split -> stage-1 -> fuse -> report and writes
/// every intermediate artifact under the run directory:
///   features/<variant>.csv, split.csv, models/, preds/, report.json,
///   report.txt and run.log (the only file with wall-clock times).
/// Failures carry the stage name. If any fusion SVR exhausts its iteration
/// budget, the report is still written and NoConvergence is raised last.
inline ExperimentReport RunExperiment(const ExperimentConfig &cfg, std::ostream *progress = nullptr) {
  using namespace experiment_internal;
  namespace fs = std::filesystem;
  const fs::path run = cfg.RunDir();
  std::error_code ec;
  for (const char *sub : {"features", "models", "preds"}) {
    fs::create_directories(run / sub, ec);
    if (ec) Fail(ErrorKind::kIo, "cannot create " + (run / sub).string() + ": " + ec.message());
  }
  std::ofstream log(run / "run.log", std::ios::binary);
  auto note = [&](const std::string &msg) {
    log << Timestamp() << "  " << msg << "\n";
    log.flush();
    if (progress) *progress << msg << "\n";
  };
  note("experiment " + cfg.name + " started");

  const Manifest manifest = Stage("manifest", [&] { return ReadManifest(cfg.dataset); });
  for (const auto &w : manifest.warnings) note("warning: " + w);
  note("manifest: " + std::to_string(manifest.size()) + " utterances");
  const GoldMap gold = GoldLabels(manifest);

  std::map<std::string, FeatureTable> features = Stage("extract", [&] {
    dsp::FrameConfig frame;
    frame.silence_factor = cfg.silence_factor;
    auto tables = ExtractAcoustic(manifest, cfg.acoustic_features, frame, cfg.jobs);
    for (const auto &v : cfg.text_features) tables.emplace(v, ExtractText(manifest, v));
    for (const auto &[v, t] : tables) WriteFeatureCsv(run / "features" / (v + ".csv"), t);
    return tables;
  });
  note("extract: " + std::to_string(features.size()) + " feature tables");

  const SplitPlan split = Stage("split", [&] {
    auto p = MakeSplit(manifest, cfg.mode, cfg.heldout_sessions, cfg.seed);
    if (p.train_ids.size() < 2 || p.dev_ids.size() < 2 || p.test_ids.size() < 2)
      Fail(ErrorKind::kEmptySplit, "split leaves fewer than 2 utterances in a partition");
    WriteSplitCsv(run / "split.csv", p);
    return p;
  });
  note("split: train " + std::to_string(split.train_ids.size()) + ", dev " +
       std::to_string(split.dev_ids.size()) + ", test " + std::to_string(split.test_ids.size()));

  struct Job {
    std::string modality, variant;
  };
  std::vector<Job> jobs;
  for (const auto &v : cfg.acoustic_features) jobs.push_back({"acoustic", v});
  for (const auto &v : cfg.text_features) jobs.push_back({"text", v});
  std::vector<ModalityResult> results(jobs.size(), ModalityResult{stage1::RegressorModel(), {}, {}, 0, {}, {}});
  Stage("stage1", [&] {
    // With the loss-weight search the parallelism goes to the grid instead.
    const std::size_t outer = cfg.mtl_search ? 1 : cfg.jobs;
    const std::size_t inner = cfg.mtl_search ? cfg.jobs : 1;
    ParallelFor(jobs.size(), outer, [&](std::size_t k) {
      const auto &j = jobs[k];
      stage1::NetConfig net = j.modality == "acoustic" ? cfg.acoustic_net : cfg.text_net;
      net.seed = ModelSeed(cfg.seed, j.modality + ":" + j.variant);
      const MtlWeights w = j.modality == "acoustic" ? cfg.acoustic_mtl : cfg.text_mtl;
      try {
        results[k] = TrainModality(features.at(j.variant), split, gold, net, w, cfg.mtl_search, inner);
      } catch (const Error &e) {
        Fail(e.kind(), j.modality + ":" + j.variant + ": " + e.detail());
      }
      const std::string stem = j.modality + "_" + j.variant;
      stage1::SaveModel(run / "models" / (stem + ".affnet"), results[k].model, features.at(j.variant).schema_id());
      stage1::WritePredictionCsv(run / "preds" / (stem + "_dev.csv"), results[k].dev);
      stage1::WritePredictionCsv(run / "preds" / (stem + "_test.csv"), results[k].test);
    });
  });
  note("stage1: " + std::to_string(jobs.size()) + " models trained");

  ExperimentReport report;
  report.name = cfg.name;
  report.settings = ResolvedSettings(cfg);
  report.mode = std::string(SplitModeName(split.mode));
  report.heldout_sessions = split.heldout_sessions;
  report.n_train = split.train_ids.size();
  report.n_dev = split.dev_ids.size();
  report.n_test = split.test_ids.size();
  std::map<std::string, std::size_t> by_variant;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto &res = results[k];
    UnimodalScore u;
    u.modality = jobs[k].modality;
    u.variant = jobs[k].variant;
    u.schema_id = features.at(u.variant).schema_id();
    u.alpha = res.weights.alpha;
    u.beta = res.weights.beta;
    u.best_epoch = res.best_epoch;
    u.ccc = Stage("report", [&] { return ScorePredictions(res.test, gold); });
    u.mean = MeanCcc(u.ccc);
    if (res.search)
      for (const auto &c : res.search->cells)
        u.mtl_grid.push_back({c.weights.alpha, c.weights.beta, c.dev_mean_ccc});
    report.unimodal.push_back(std::move(u));
    by_variant[jobs[k].variant] = k;
  }

  struct Pair {
    std::string acoustic, text;
  };
  std::vector<Pair> pairs;
  for (const auto &a : cfg.acoustic_features)
    for (const auto &t : cfg.text_features) pairs.push_back({a, t});
  std::vector<FusionResult> fused(pairs.size());
  Stage("fuse", [&] {
    ParallelFor(pairs.size(), cfg.jobs, [&](std::size_t k) {
      const auto &ra = results[by_variant.at(pairs[k].acoustic)];
      const auto &rt = results[by_variant.at(pairs[k].text)];
      fused[k] = Fuse(ra.dev, rt.dev, ra.test, rt.test, gold, cfg.svr);
      const std::string stem = pairs[k].acoustic + "+" + pairs[k].text;
      stage1::WritePredictionCsv(run / "preds" / ("fused_" + stem + "_test.csv"), fused[k].fused);
      for (std::size_t d = 0; d < kNumDims; ++d)
        svr::SaveSvrModel(fused[k].models[d], run / "models" / ("svr_" + stem + "_" + kDimNames[d] + ".json"));
    });
  });
  note("fuse: " + std::to_string(pairs.size()) + " pairs");

  Stage("report", [&] {
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      FusedScore f;
      f.acoustic = pairs[k].acoustic;
      f.text = pairs[k].text;
      f.ccc = ScorePredictions(fused[k].fused, gold);
      f.mean = MeanCcc(f.ccc);
      f.svr_converged = fused[k].converged();
      report.fused.push_back(f);
    }
    ComputeImprovements(report);
    WriteText(run / "report.json", ReportToJson(report));
    WriteText(run / "report.txt", RenderReportText(report));
  });
  note("report written to " + (run / "report.json").string());

  for (const auto &f : report.fused)
    if (!f.svr_converged)
      Fail(ErrorKind::kNoConvergence, "stage fuse: svr for " + f.acoustic + "+" + f.text +
                                          " hit its iteration budget (svr.max_passes); report written");
  return report;
}

}  // namespace affuse::pipeline
