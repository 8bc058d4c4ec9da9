// affuse/cli.hpp

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

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "affuse/dsp/features.hpp"
#include "affuse/error.hpp"
#include "affuse/pipeline/config.hpp"
#include "affuse/pipeline/experiment.hpp"
#include "affuse/pipeline/extraction.hpp"
#include "affuse/pipeline/fusion.hpp"
#include "affuse/pipeline/manifest.hpp"
#include "affuse/pipeline/modality.hpp"
#include "affuse/pipeline/mtl_search.hpp"
#include "affuse/pipeline/report.hpp"
#include "affuse/pipeline/split.hpp"
#include "affuse/pipeline/stats.hpp"
#include "affuse/pipeline/synth.hpp"
#include "affuse/stage1/model_io.hpp"
#include "affuse/stage1/predictions.hpp"
#include "affuse/svr/grid_search.hpp"
#include "affuse/svr/model_io.hpp"

namespace affuse::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitConvergence = 4;

/// 2 for anything the user fixes in flags, config or input files, 3 for data
/// that cannot support the computation, 4 when an SVR ran out of iterations.
inline int ExitCodeFor(ErrorKind k) {
  switch (k) {
    case ErrorKind::kConfig:
    case ErrorKind::kParse:
    case ErrorKind::kIo:
    case ErrorKind::kMissingAudio:
    case ErrorKind::kInvalidWeights:
    case ErrorKind::kUnknownSession:
      return kExitConfig;
    case ErrorKind::kNoConvergence:
      return kExitConvergence;
    default:
      return kExitData;
  }
}

namespace cli_internal {

using pipeline::config_internal::Join;
using pipeline::config_internal::List;

/// Stage-1 network flags; unset flags keep the modality default.
struct NetFlags {
  std::vector<std::pair<std::string, std::string>> values;  // field, value
  std::vector<std::pair<std::string, CLI::Option *>> options;

  void Add(CLI::App *app) {
    std::vector<std::pair<std::string, std::string>> ac, tx;
    pipeline::config_internal::NetEntries(ac, "", pipeline::DefaultAcousticNet());
    pipeline::config_internal::NetEntries(tx, "", pipeline::DefaultTextNet());
    auto shown = [](const std::string &v) {
      char *end = nullptr;
      const double x = std::strtod(v.c_str(), &end);
      if (v.empty() || *end != '\0') return v;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", x);
      return std::string(buf);
    };
    for (auto &e : ac) e.second = shown(e.second);
    for (auto &e : tx) e.second = shown(e.second);
    values.resize(ac.size());
    for (std::size_t i = 0; i < ac.size(); ++i) {
      std::string flag = "--" + ac[i].first;
      for (char &c : flag)
        if (c == '_') c = '-';
      std::string desc = "Stage-1 " + ac[i].first + " (default: " + ac[i].second;
      if (tx[i].second != ac[i].second) desc += " acoustic, " + tx[i].second + " text";
      desc += ")";
      values[i].first = ac[i].first;
      options.emplace_back(ac[i].first, app->add_option(flag, values[i].second, desc));
    }
  }

  stage1::NetConfig Apply(stage1::NetConfig c) const {
    for (std::size_t i = 0; i < values.size(); ++i)
      if (options[i].second->count())
        pipeline::config_internal::SetNet(c, values[i].first, options[i].second->get_name(), values[i].second);
    stage1::ValidateNetConfig(c);
    return c;
  }
};

struct SplitFlags {
  std::string split_file;
  std::string mode = "SD";
  std::string heldout;
  std::uint64_t seed = 0;

  void Add(CLI::App *app) {
    app->add_option("--split", split_file, "Split file (utterance_id,split); overrides --mode");
    app->add_option("--mode", mode, "Split protocol when no split file is given")
        ->check(CLI::IsMember({"SD", "LOSO"}));
    app->add_option("--heldout", heldout, "Comma-separated held-out sessions for LOSO");
    app->add_option("--seed", seed, "Seed for the split and network initialisation")->envname("AFFUSE_SEED");
  }

  pipeline::SplitPlan Make(const pipeline::Manifest &m) const {
    if (!split_file.empty()) return pipeline::ReadSplitCsv(split_file);
    return pipeline::MakeSplit(m, pipeline::ParseSplitMode(mode), List(heldout), seed);
  }
};

struct SvrFlags {
  svr::SvrConfig cfg;

  void Add(CLI::App *app) {
    app->add_option("--c", cfg.c, "SVR box constraint C")->check(CLI::PositiveNumber);
    app->add_option("--gamma", cfg.gamma, "RBF kernel width gamma")->check(CLI::PositiveNumber);
    app->add_option("--epsilon", cfg.epsilon, "Width of the insensitive tube")->check(CLI::NonNegativeNumber);
    app->add_option("--tolerance", cfg.tolerance, "KKT stopping tolerance")->check(CLI::PositiveNumber);
    app->add_option("--max-passes", cfg.max_passes, "Iteration budget in passes over the data")
        ->check(CLI::PositiveNumber);
  }
};

inline void MakeDir(const fs::path &p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create " + p.string() + ": " + ec.message());
}

inline void WriteFile(const fs::path &p, const std::string &s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + p.string());
  out << s;
  if (!out) Fail(ErrorKind::kIo, "write failed for " + p.string());
}

inline std::string ReadFile(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string CccLine(const std::string &label, const std::array<double, kNumDims> &c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-28s %8.4f %8.4f %8.4f %8.4f\n", label.c_str(), c[0], c[1], c[2],
                MeanCcc(c));
  return buf;
}

inline std::string CccHeader() {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-28s %8s %8s %8s %8s\n", "system", "valence", "arousal", "dominance",
                "mean");
  return buf;
}

/// A series given inline as "0.1,0.2,..." or as a file of numbers separated
/// by commas or whitespace.
inline std::vector<double> ReadSeries(const std::string &arg, const std::string &flag) {
  std::string text = arg;
  std::error_code ec;
  if (fs::is_regular_file(arg, ec)) text = ReadFile(arg);
  for (char &c : text)
    if (c == '\n' || c == '\r' || c == '\t' || c == ' ') c = ',';
  std::vector<double> out;
  for (const auto &item : List(text)) {
    try {
      out.push_back(csv::ParseReal(item, 0, flag));
    } catch (const Error &) {
      Fail(ErrorKind::kParse, flag + ": not a number: '" + item + "'");
    }
  }
  return out;
}

inline std::vector<svr::TrainPoint> FusionPoints(const stage1::PredictionSet &a, const stage1::PredictionSet &t,
                                                 const pipeline::GoldMap &gold, std::size_t d) {
  std::unordered_map<std::string, std::size_t> ti;
  for (std::size_t i = 0; i < t.size(); ++i) ti.emplace(t.ids[i], i);
  std::vector<svr::TrainPoint> pts;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto j = ti.find(a.ids[i]);
    const auto g = gold.find(a.ids[i]);
    if (j == ti.end()) Fail(ErrorKind::kIdMismatch, "no text prediction for '" + a.ids[i] + "'");
    if (g == gold.end()) Fail(ErrorKind::kIdMismatch, "no gold label for '" + a.ids[i] + "'");
    pts.push_back({{a.triples[i][d], t.triples[j->second][d]}, g->second[d]});
  }
  return pts;
}

}  // namespace cli_internal

/// Parses `argv` and runs one subcommand. Normal output goes to `out`,
/// diagnostics to `err`. Returns the process exit code.
inline int Main(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
  using namespace cli_internal;
  using namespace pipeline;

  CLI::App app{"Two-stage dimensional speech emotion regression with late fusion", "affuse"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.get_formatter()->column_width(34);

  // extract
  std::string ex_manifest, ex_out, ex_features = "hsf2";
  double ex_silence = 0.3;
  std::uint64_t ex_seed = 0;
  std::size_t ex_jobs = 1;
  auto *extract = app.add_subcommand("extract", "Extract feature tables from a manifest");
  extract->add_option("--manifest", ex_manifest, "Manifest CSV")->required();
  extract->add_option("--out", ex_out, "Output directory for <variant>.csv")->required();
  extract->add_option("--features", ex_features, "Comma-separated variants: hsf1, hsf2, lldseg, text, "
                                                 "text-bigram, text-idf");
  extract->add_option("--silence-factor", ex_silence, "Silence threshold as a fraction of mean frame RMS")
      ->check(CLI::PositiveNumber);
  extract->add_option("--seed", ex_seed, "Hash seed for text embeddings")->envname("AFFUSE_SEED");
  extract->add_option("--jobs", ex_jobs, "Worker threads")->check(CLI::PositiveNumber);

  // synth-data
  SynthConfig sy;
  std::string sy_out;
  auto *synth = app.add_subcommand("synth-data", "Generate the synthetic corpus with planted signal");
  synth->add_option("--out", sy_out, "Output directory")->required();
  synth->add_option("--utterances", sy.utterances, "Number of utterances")->check(CLI::PositiveNumber);
  synth->add_option("--sessions", sy.sessions, "Number of sessions")->check(CLI::PositiveNumber);
  synth->add_option("--speakers-per-session", sy.speakers_per_session, "Speakers per session")
      ->check(CLI::PositiveNumber);
  synth->add_option("--bad-rows", sy.out_of_range_rows, "Extra manifest rows with off-scale labels");
  synth->add_option("--seed", sy.seed, "Generator seed")->envname("AFFUSE_SEED");

  // train
  std::string tr_features, tr_manifest, tr_out, tr_modality = "acoustic";
  MtlWeights tr_w;
  bool tr_search = false;
  std::size_t tr_jobs = 1;
  NetFlags tr_net;
  SplitFlags tr_split;
  auto *train = app.add_subcommand("train", "Train one stage-1 regressor and predict dev and test");
  train->add_option("--features", tr_features, "Feature CSV")->required();
  train->add_option("--manifest", tr_manifest, "Manifest CSV with gold labels")->required();
  train->add_option("--out", tr_out, "Output directory")->required();
  train->add_option("--modality", tr_modality, "Selects the network defaults")
      ->check(CLI::IsMember({"acoustic", "text"}));
  train->add_option("--alpha", tr_w.alpha, "Valence loss weight");
  train->add_option("--beta", tr_w.beta, "Arousal loss weight");
  train->add_flag("--mtl-search", tr_search, "Pick alpha and beta by the 66-point grid search");
  train->add_option("--jobs", tr_jobs, "Worker threads")->check(CLI::PositiveNumber);
  tr_split.Add(train);
  tr_net.Add(train);

  // fuse
  std::string fu_ad, fu_td, fu_at, fu_tt, fu_manifest, fu_out;
  std::size_t fu_jobs = 1;
  SvrFlags fu_svr;
  auto *fuse = app.add_subcommand("fuse", "Fuse acoustic and text predictions with per-dimension SVRs");
  fuse->add_option("--acoustic-dev", fu_ad, "Acoustic dev predictions CSV")->required();
  fuse->add_option("--text-dev", fu_td, "Text dev predictions CSV")->required();
  fuse->add_option("--acoustic-test", fu_at, "Acoustic test predictions CSV")->required();
  fuse->add_option("--text-test", fu_tt, "Text test predictions CSV")->required();
  fuse->add_option("--manifest", fu_manifest, "Manifest CSV with gold labels")->required();
  fuse->add_option("--out", fu_out, "Output directory")->required();
  fuse->add_option("--jobs", fu_jobs, "Worker threads")->check(CLI::PositiveNumber);
  fu_svr.Add(fuse);

  // evaluate
  std::string ev_pred, ev_manifest, ev_format = "text";
  auto *evaluate = app.add_subcommand("evaluate", "Score a prediction CSV against gold labels");
  evaluate->add_option("--predictions", ev_pred, "Prediction CSV")->required();
  evaluate->add_option("--manifest", ev_manifest, "Manifest CSV with gold labels")->required();
  evaluate->add_option("--format", ev_format, "Output format")->check(CLI::IsMember({"text", "json"}));

  // grid-search mtl | svr
  auto *grid = app.add_subcommand("grid-search", "Hyper-parameter searches");
  grid->require_subcommand(1);
  std::string gm_features, gm_manifest, gm_out, gm_modality = "acoustic";
  std::size_t gm_jobs = 1;
  NetFlags gm_net;
  SplitFlags gm_split;
  auto *grid_mtl = grid->add_subcommand("mtl", "Search the 66 multitask loss weightings on dev");
  grid_mtl->add_option("--features", gm_features, "Feature CSV")->required();
  grid_mtl->add_option("--manifest", gm_manifest, "Manifest CSV with gold labels")->required();
  grid_mtl->add_option("--out", gm_out, "Optional output directory for mtl_grid.csv");
  grid_mtl->add_option("--modality", gm_modality, "Selects the network defaults")
      ->check(CLI::IsMember({"acoustic", "text"}));
  grid_mtl->add_option("--jobs", gm_jobs, "Worker threads")->check(CLI::PositiveNumber);
  gm_split.Add(grid_mtl);
  gm_net.Add(grid_mtl);
  std::string gs_ta, gs_tt, gs_va, gs_vt, gs_manifest, gs_out;
  SvrFlags gs_svr;
  auto *grid_svr = grid->add_subcommand("svr", "Search C and gamma of the fusion SVRs on a validation set");
  grid_svr->add_option("--train-acoustic", gs_ta, "Acoustic predictions the SVRs are fitted on")->required();
  grid_svr->add_option("--train-text", gs_tt, "Text predictions the SVRs are fitted on")->required();
  grid_svr->add_option("--val-acoustic", gs_va, "Acoustic validation predictions")->required();
  grid_svr->add_option("--val-text", gs_vt, "Text validation predictions")->required();
  grid_svr->add_option("--manifest", gs_manifest, "Manifest CSV with gold labels")->required();
  grid_svr->add_option("--out", gs_out, "Optional output directory for svr_grid.csv");
  grid_svr->add_option("--epsilon", gs_svr.cfg.epsilon, "Width of the insensitive tube")
      ->check(CLI::NonNegativeNumber);
  grid_svr->add_option("--tolerance", gs_svr.cfg.tolerance, "KKT stopping tolerance")->check(CLI::PositiveNumber);
  grid_svr->add_option("--max-passes", gs_svr.cfg.max_passes, "Iteration budget in passes over the data")
      ->check(CLI::PositiveNumber);

  // report
  std::string rp_dir, rp_format = "text";
  auto *report = app.add_subcommand("report", "Render the tables of a finished run");
  report->add_option("--run-dir", rp_dir, "Run directory holding report.json")->required();
  report->add_option("--format", rp_format, "Output format")->check(CLI::IsMember({"text", "json", "csv"}));

  // ttest
  std::string tt_a, tt_b;
  double tt_p = 0.05;
  auto *ttest = app.add_subcommand("ttest", "Two-tailed paired t-test between two score series");
  ttest->add_option("--a", tt_a, "First series: comma-separated values or a file")->required();
  ttest->add_option("--b", tt_b, "Second series: comma-separated values or a file")->required();
  ttest->add_option("--p-threshold", tt_p, "Significance level")->check(CLI::Range(0.0, 1.0));

  // run
  std::string rn_config;
  bool rn_dry = false, rn_quiet = false;
  std::size_t rn_jobs = 0;
  auto *run = app.add_subcommand("run", "Run a whole experiment from a config file");
  run->add_option("--config", rn_config, "Experiment config file")->required();
  run->add_flag("--dry-run", rn_dry, "Print the resolved plan and exit");
  run->add_option("--jobs", rn_jobs, "Worker threads; 0 keeps the config value");
  run->add_flag("--quiet", rn_quiet, "Suppress progress lines on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*extract) {
      const Manifest m = ReadManifest(ex_manifest);
      for (const auto &w : m.warnings) err << "warning: " << w << "\n";
      const auto variants = List(ex_features);
      if (variants.empty()) Fail(ErrorKind::kConfig, "--features: no variant given");
      std::vector<std::string> acoustic;
      for (const auto &v : variants) {
        if (IsAcousticVariant(v)) acoustic.push_back(v);
        else if (!IsTextVariant(v)) Fail(ErrorKind::kConfig, "--features: unknown variant '" + v + "'");
      }
      dsp::FrameConfig frame;
      frame.silence_factor = ex_silence;
      auto tables = ExtractAcoustic(m, acoustic, frame, ex_jobs);
      for (const auto &v : variants)
        if (IsTextVariant(v)) tables.emplace(v, ExtractText(m, v, ex_seed));
      MakeDir(ex_out);
      for (const auto &v : variants) {
        const auto &t = tables.at(v);
        WriteFeatureCsv(fs::path(ex_out) / (v + ".csv"), t);
        out << v << ": " << t.size() << " rows, " << t.dim() << " columns, schema " << t.schema_id() << "\n";
      }
      return kExitOk;
    }

    if (*synth) {
      const Manifest m = GenerateSynthetic(sy_out, sy);
      out << "wrote " << m.size() << " utterances to " << (fs::path(sy_out) / "manifest.csv").string() << "\n";
      out << "experiment config: " << (fs::path(sy_out) / "experiment.cfg").string() << "\n";
      return kExitOk;
    }

    if (*train || *grid_mtl) {
      const bool is_train = bool(*train);
      const std::string &features_path = is_train ? tr_features : gm_features;
      const Manifest m = ReadManifest(is_train ? tr_manifest : gm_manifest);
      for (const auto &w : m.warnings) err << "warning: " << w << "\n";
      const FeatureTable table = ReadFeatureCsv(fs::path(features_path));
      const SplitFlags &sf = is_train ? tr_split : gm_split;
      const SplitPlan split = sf.Make(m);
      const std::string &modality = is_train ? tr_modality : gm_modality;
      const NetFlags &nf = is_train ? tr_net : gm_net;
      stage1::NetConfig net = nf.Apply(modality == "acoustic" ? DefaultAcousticNet() : DefaultTextNet());
      net.seed = sf.seed;
      const GoldMap gold = GoldLabels(m);
      if (is_train) {
        const auto r = TrainModality(table, split, gold, net, tr_w, tr_search, tr_jobs);
        const fs::path dir = tr_out;
        MakeDir(dir);
        stage1::SaveModel(dir / "model.affnet", r.model, table.schema_id());
        stage1::WritePredictionCsv(dir / "dev.csv", r.dev);
        stage1::WritePredictionCsv(dir / "test.csv", r.test);
        if (sf.split_file.empty()) WriteSplitCsv(dir / "split.csv", split);
        char buf[128];
        std::snprintf(buf, sizeof buf, "alpha %.2f  beta %.2f  best epoch %zu\n", r.weights.alpha,
                      r.weights.beta, r.best_epoch);
        out << buf << CccHeader() << CccLine("dev", ScorePredictions(r.dev, gold))
            << CccLine("test", ScorePredictions(r.test, gold));
        return kExitOk;
      }
      stage1::Samples tr = BuildSamples(table, split.train_ids, gold);
      stage1::Samples dv = BuildSamples(table, split.dev_ids, gold);
      const Standardizer z = Standardizer::Fit(tr.x);
      tr.x = z.Apply(tr.x);
      dv.x = z.Apply(dv.x);
      const auto r = MtlGridSearch(tr, dv, net, gm_jobs);
      std::ostringstream csv_out;
      csv_out << "alpha,beta,dev_mean_ccc\n";
      for (const auto &c : r.cells)
        csv_out << csv::FormatReal(c.weights.alpha, 2) << "," << csv::FormatReal(c.weights.beta, 2) << ","
                << csv::FormatReal(c.dev_mean_ccc, 17) << "\n";
      out << csv_out.str();
      char buf[128];
      std::snprintf(buf, sizeof buf, "best: alpha %.2f  beta %.2f  dev mean CCC %.4f\n", r.best.alpha,
                    r.best.beta, r.best_dev_mean_ccc);
      out << buf;
      if (!gm_out.empty()) {
        MakeDir(gm_out);
        WriteFile(fs::path(gm_out) / "mtl_grid.csv", csv_out.str());
      }
      return kExitOk;
    }

    if (*fuse) {
      const Manifest m = ReadManifest(fu_manifest);
      const GoldMap gold = GoldLabels(m);
      using stage1::ReadPredictionCsv;
      const auto ad = ReadPredictionCsv(fs::path(fu_ad)), td = ReadPredictionCsv(fs::path(fu_td));
      const auto at = ReadPredictionCsv(fs::path(fu_at)), tt = ReadPredictionCsv(fs::path(fu_tt));
      const auto r = Fuse(ad, td, at, tt, gold, fu_svr.cfg, fu_jobs);
      const fs::path dir = fu_out;
      MakeDir(dir);
      stage1::WritePredictionCsv(dir / "fused_test.csv", r.fused);
      for (std::size_t d = 0; d < kNumDims; ++d)
        svr::SaveSvrModel(r.models[d], dir / ("svr_" + std::string(kDimNames[d]) + ".json"));
      out << CccHeader();
      const bool scored = std::all_of(r.fused.ids.begin(), r.fused.ids.end(),
                                      [&](const std::string &id) { return gold.count(id) > 0; });
      if (scored) {
        const auto ca = ScorePredictions(at, gold), ct = ScorePredictions(tt, gold);
        const auto cf = ScorePredictions(r.fused, gold);
        out << CccLine("acoustic", ca) << CccLine("text", ct) << CccLine("fused", cf);
        const double best = std::max(MeanCcc(ca), MeanCcc(ct));
        if (best > 0.0) {
          char buf[96];
          std::snprintf(buf, sizeof buf, "relative improvement: %.2f%%\n", RelativeImprovement(MeanCcc(cf), best));
          out << buf;
        }
      }
      if (!r.converged())
        Fail(ErrorKind::kNoConvergence, "an SVR hit its iteration budget (--max-passes); outputs written");
      return kExitOk;
    }

    if (*evaluate) {
      const Manifest m = ReadManifest(ev_manifest);
      const auto p = stage1::ReadPredictionCsv(fs::path(ev_pred));
      const auto c = ScorePredictions(p, GoldLabels(m));
      if (ev_format == "json") {
        nlohmann::ordered_json j;
        for (std::size_t d = 0; d < kNumDims; ++d) j[kDimNames[d]] = c[d];
        j["mean"] = MeanCcc(c);
        out << j.dump(2) << "\n";
      } else {
        out << CccHeader() << CccLine(fs::path(ev_pred).filename().string(), c);
      }
      return kExitOk;
    }

    if (*grid_svr) {
      const Manifest m = ReadManifest(gs_manifest);
      const GoldMap gold = GoldLabels(m);
      using stage1::ReadPredictionCsv;
      const auto ta = ReadPredictionCsv(fs::path(gs_ta)), tt = ReadPredictionCsv(fs::path(gs_tt));
      const auto va = ReadPredictionCsv(fs::path(gs_va)), vt = ReadPredictionCsv(fs::path(gs_vt));
      std::ostringstream csv_out;
      csv_out << "dimension,c,gamma,val_ccc,valid\n";
      std::string summary;
      for (std::size_t d = 0; d < kNumDims; ++d) {
        const auto tr = FusionPoints(ta, tt, gold, d), va_pts = FusionPoints(va, vt, gold, d);
        const auto r = svr::SvrGridSearch(tr, va_pts, gs_svr.cfg);
        for (const auto &c : r.cells)
          csv_out << kDimNames[d] << "," << csv::FormatReal(c.c, 17) << "," << csv::FormatReal(c.gamma, 17) << ","
                  << csv::FormatReal(c.ccc, 17) << "," << (c.valid ? "true" : "false") << "\n";
        char buf[128];
        std::snprintf(buf, sizeof buf, "best %-9s C %-6g gamma %-6g val CCC %.4f\n", kDimNames[d], r.best.c,
                      r.best.gamma, r.best_ccc);
        summary += buf;
      }
      out << csv_out.str() << summary;
      if (!gs_out.empty()) {
        MakeDir(gs_out);
        WriteFile(fs::path(gs_out) / "svr_grid.csv", csv_out.str());
      }
      return kExitOk;
    }

    if (*report) {
      const fs::path json = fs::path(rp_dir) / "report.json";
      std::error_code ec;
      if (!fs::is_regular_file(json, ec)) {
        err << "error: incomplete run: " << json.string() << " not found\n";
        return kExitData;
      }
      ExperimentReport r;
      try {
        r = ReportFromJson(ReadFile(json));
      } catch (const Error &e) {
        err << "error: incomplete run: " << e.what() << "\n";
        return kExitData;
      }
      if (rp_format == "json") out << ReportToJson(r);
      else if (rp_format == "csv") out << RenderReportCsv(r);
      else out << RenderReportText(r);
      return kExitOk;
    }

    if (*ttest) {
      const auto a = ReadSeries(tt_a, "--a"), b = ReadSeries(tt_b, "--b");
      const auto r = PairedTTest(a, b, tt_p);
      char buf[160];
      std::snprintf(buf, sizeof buf, "t = %.6f\ndf = %zu\np = %.6g\nsignificant at %g: %s\n", r.t_stat, r.df,
                    r.p_value, tt_p, r.significant ? "yes" : "no");
      out << buf;
      return kExitOk;
    }

    if (*run) {
      ExperimentConfig cfg = LoadConfig(rn_config);
      if (rn_jobs > 0) cfg.jobs = rn_jobs;
      if (rn_dry) {
        out << DescribePlan(cfg);
        return kExitOk;
      }
      const ExperimentReport r = RunExperiment(cfg, rn_quiet ? nullptr : &err);
      out << RenderReportText(r);
      return kExitOk;
    }
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace affuse::cli
