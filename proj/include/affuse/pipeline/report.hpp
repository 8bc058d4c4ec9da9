// affuse/pipeline/report.hpp

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
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "affuse/csv.hpp"
#include "affuse/error.hpp"
#include "affuse/metrics.hpp"
#include "affuse/pipeline/stats.hpp"

namespace affuse::pipeline {

struct GridPoint {
  double alpha = 0.0;
  double beta = 0.0;
  double dev_mean_ccc = 0.0;
};

struct UnimodalScore {
  std::string modality;  // "acoustic" or "text"
  std::string variant;   // e.g. "hsf2"
  std::string schema_id;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t best_epoch = 0;
  std::array<double, kNumDims> ccc{};
  double mean = 0.0;
  std::vector<GridPoint> mtl_grid;  // empty unless the weights were searched

  std::string system() const { return modality + ":" + variant; }
};

struct FusedScore {
  std::string acoustic;
  std::string text;
  std::array<double, kNumDims> ccc{};
  double mean = 0.0;
  double best_single = 0.0;
  std::optional<double> relative_improvement;  // undefined for a non-positive baseline
  bool svr_converged = true;
};

struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> settings;
  std::string mode;
  std::vector<std::string> heldout_sessions;
  std::size_t n_train = 0, n_dev = 0, n_test = 0;
  std::vector<UnimodalScore> unimodal;
  std::vector<FusedScore> fused;
  std::optional<ImprovementStats> improvement;

  const UnimodalScore *Find(const std::string &modality, const std::string &variant) const {
    for (const auto &u : unimodal)
      if (u.modality == modality && u.variant == variant) return &u;
    return nullptr;
  }
};

/// Fills each fused row's baseline and relative improvement from the
/// unimodal rows, then the summary statistics.
inline void ComputeImprovements(ExperimentReport &r) {
  std::vector<double> values;
  for (auto &f : r.fused) {
    const auto *a = r.Find("acoustic", f.acoustic);
    const auto *t = r.Find("text", f.text);
    if (!a || !t) Fail(ErrorKind::kIdMismatch, "fused row " + f.acoustic + "+" + f.text + " lacks unimodal scores");
    f.best_single = std::max(a->mean, t->mean);
    f.relative_improvement.reset();
    if (f.best_single > 0.0) {
      f.relative_improvement = RelativeImprovement(f.mean, f.best_single);
      values.push_back(*f.relative_improvement);
    }
  }
  r.improvement.reset();
  if (!values.empty()) r.improvement = Summarize(values);
}

namespace report_internal {

using nlohmann::ordered_json;

inline ordered_json Triple(const std::array<double, kNumDims> &c) {
  ordered_json j;
  for (std::size_t d = 0; d < kNumDims; ++d) j[kDimNames[d]] = c[d];
  return j;
}

inline std::array<double, kNumDims> Triple(const nlohmann::json &j) {
  std::array<double, kNumDims> c{};
  for (std::size_t d = 0; d < kNumDims; ++d) c[d] = j.at(kDimNames[d]).get<double>();
  return c;
}

inline std::string Fixed(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string Pad(const std::string &s, std::size_t w, bool left = false) {
  if (s.size() >= w) return s;
  return left ? s + std::string(w - s.size(), ' ') : std::string(w - s.size(), ' ') + s;
}

}  // namespace report_internal

/// Deterministic JSON: fixed key order, shortest round-trip numbers, no
/// timestamps or host details.
inline std::string ReportToJson(const ExperimentReport &r) {
  using namespace report_internal;
  ordered_json j;
  j["format"] = "affuse-report";
  j["version"] = 1;
  j["name"] = r.name;
  ordered_json settings = ordered_json::object();
  for (const auto &[k, v] : r.settings) settings[k] = v;
  j["settings"] = settings;
  j["split"] = {{"mode", r.mode},
                {"heldout_sessions", r.heldout_sessions},
                {"train", r.n_train},
                {"dev", r.n_dev},
                {"test", r.n_test}};
  ordered_json uni = ordered_json::array();
  for (const auto &u : r.unimodal) {
    ordered_json e;
    e["system"] = u.system();
    e["modality"] = u.modality;
    e["variant"] = u.variant;
    e["schema_id"] = u.schema_id;
    e["alpha"] = u.alpha;
    e["beta"] = u.beta;
    e["best_epoch"] = u.best_epoch;
    e["ccc"] = Triple(u.ccc);
    e["mean_ccc"] = u.mean;
    if (!u.mtl_grid.empty()) {
      ordered_json g = ordered_json::array();
      for (const auto &p : u.mtl_grid)
        g.push_back(ordered_json{{"alpha", p.alpha}, {"beta", p.beta}, {"dev_mean_ccc", p.dev_mean_ccc}});
      e["mtl_grid"] = g;
    }
    uni.push_back(e);
  }
  j["unimodal"] = uni;
  ordered_json fused = ordered_json::array();
  for (const auto &f : r.fused) {
    ordered_json e;
    e["acoustic"] = f.acoustic;
    e["text"] = f.text;
    e["ccc"] = Triple(f.ccc);
    e["mean_ccc"] = f.mean;
    e["best_single_mean_ccc"] = f.best_single;
    e["relative_improvement"] = f.relative_improvement ? ordered_json(*f.relative_improvement) : ordered_json();
    e["svr_converged"] = f.svr_converged;
    fused.push_back(e);
  }
  j["fused"] = fused;
  if (r.improvement) {
    j["improvement"] = {{"average", r.improvement->average},
                        {"max", r.improvement->max},
                        {"min", r.improvement->min},
                        {"std", r.improvement->std},
                        {"count", r.improvement->count}};
  } else {
    j["improvement"] = nullptr;
  }
  return j.dump(2) + "\n";
}

inline ExperimentReport ReportFromJson(const std::string &text) {
  using namespace report_internal;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "affuse-report") Fail(ErrorKind::kParse, "not an affuse report");
    ExperimentReport r;
    r.name = j.at("name").get<std::string>();
    const auto ordered = ordered_json::parse(text);
    for (const auto &[k, v] : ordered.at("settings").items()) r.settings.emplace_back(k, v.get<std::string>());
    const auto &s = j.at("split");
    r.mode = s.at("mode").get<std::string>();
    r.heldout_sessions = s.at("heldout_sessions").get<std::vector<std::string>>();
    r.n_train = s.at("train").get<std::size_t>();
    r.n_dev = s.at("dev").get<std::size_t>();
    r.n_test = s.at("test").get<std::size_t>();
    for (const auto &e : j.at("unimodal")) {
      UnimodalScore u;
      u.modality = e.at("modality").get<std::string>();
      u.variant = e.at("variant").get<std::string>();
      u.schema_id = e.at("schema_id").get<std::string>();
      u.alpha = e.at("alpha").get<double>();
      u.beta = e.at("beta").get<double>();
      u.best_epoch = e.at("best_epoch").get<std::size_t>();
      u.ccc = Triple(e.at("ccc"));
      u.mean = e.at("mean_ccc").get<double>();
      if (e.contains("mtl_grid"))
        for (const auto &g : e["mtl_grid"])
          u.mtl_grid.push_back({g.at("alpha").get<double>(), g.at("beta").get<double>(),
                                g.at("dev_mean_ccc").get<double>()});
      r.unimodal.push_back(u);
    }
    for (const auto &e : j.at("fused")) {
      FusedScore f;
      f.acoustic = e.at("acoustic").get<std::string>();
      f.text = e.at("text").get<std::string>();
      f.ccc = Triple(e.at("ccc"));
      f.mean = e.at("mean_ccc").get<double>();
      f.best_single = e.at("best_single_mean_ccc").get<double>();
      if (!e.at("relative_improvement").is_null())
        f.relative_improvement = e["relative_improvement"].get<double>();
      f.svr_converged = e.at("svr_converged").get<bool>();
      r.fused.push_back(f);
    }
    if (!j.at("improvement").is_null()) {
      const auto &i = j["improvement"];
      r.improvement = ImprovementStats{i.at("average").get<double>(), i.at("max").get<double>(),
                                       i.at("min").get<double>(), i.at("std").get<double>(),
                                       i.at("count").get<std::size_t>()};
    }
    return r;
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorKind::kParse, std::string("malformed report: ") + e.what());
  }
}

/// Aligned-column tables: unimodal scores, fused pairs, then the
/// improvement statistics. Numbers carry 4 decimals.
inline std::string RenderReportText(const ExperimentReport &r) {
  using namespace report_internal;
  std::ostringstream os;
  os << "Experiment " << r.name << "  (" << r.mode << " split: train " << r.n_train << ", dev "
     << r.n_dev << ", test " << r.n_test << ")\n\n";
  os << "Unimodal test CCC\n";
  os << Pad("system", 22, true) << Pad("alpha", 7) << Pad("beta", 7) << Pad("V", 9) << Pad("A", 9)
     << Pad("D", 9) << Pad("mean", 9) << '\n';
  for (const auto &u : r.unimodal) {
    os << Pad(u.system(), 22, true) << Pad(Fixed(u.alpha, 2), 7) << Pad(Fixed(u.beta, 2), 7);
    for (double c : u.ccc) os << Pad(Fixed(c), 9);
    os << Pad(Fixed(u.mean), 9) << '\n';
  }
  os << "\nLate fusion test CCC\n";
  os << Pad("acoustic", 10, true) << Pad("text", 13, true) << Pad("V", 9) << Pad("A", 9)
     << Pad("D", 9) << Pad("mean", 9) << Pad("best single", 13) << Pad("improve %", 11) << '\n';
  for (const auto &f : r.fused) {
    os << Pad(f.acoustic, 10, true) << Pad(f.text, 13, true);
    for (double c : f.ccc) os << Pad(Fixed(c), 9);
    os << Pad(Fixed(f.mean), 9) << Pad(Fixed(f.best_single), 13)
       << Pad(f.relative_improvement ? Fixed(*f.relative_improvement, 2) : "n/a", 11)
       << (f.svr_converged ? "" : "  (svr not converged)") << '\n';
  }
  os << "\nRelative improvement statistics (%)\n";
  if (r.improvement) {
    os << Pad("Average", 10, true) << Pad(Fixed(r.improvement->average, 2), 10) << '\n';
    os << Pad("Max", 10, true) << Pad(Fixed(r.improvement->max, 2), 10) << '\n';
    os << Pad("Min", 10, true) << Pad(Fixed(r.improvement->min, 2), 10) << '\n';
    os << Pad("Std", 10, true) << Pad(Fixed(r.improvement->std, 2), 10) << '\n';
  } else {
    os << "  n/a (no positive baseline)\n";
  }
  return os.str();
}

/// One CSV row per system plus one per statistic, full precision.
inline std::string RenderReportCsv(const ExperimentReport &r) {
  std::ostringstream os;
  auto num = [](double v) { return csv::FormatReal(v, 17); };
  os << "section,system,acoustic,text,valence,arousal,dominance,mean,relative_improvement\n";
  for (const auto &u : r.unimodal) {
    os << "unimodal," << csv::Quote(u.system()) << ','
       << (u.modality == "acoustic" ? u.variant : "") << ',' << (u.modality == "text" ? u.variant : "");
    for (double c : u.ccc) os << ',' << num(c);
    os << ',' << num(u.mean) << ",\n";
  }
  for (const auto &f : r.fused) {
    os << "fused," << csv::Quote(f.acoustic + "+" + f.text) << ',' << f.acoustic << ',' << f.text;
    for (double c : f.ccc) os << ',' << num(c);
    os << ',' << num(f.mean) << ',' << (f.relative_improvement ? num(*f.relative_improvement) : "") << '\n';
  }
  if (r.improvement) {
    const std::pair<const char *, double> rows[] = {{"average", r.improvement->average},
                                                    {"max", r.improvement->max},
                                                    {"min", r.improvement->min},
                                                    {"std", r.improvement->std}};
    for (const auto &[k, v] : rows) os << "improvement," << k << ",,,,,,," << num(v) << '\n';
  }
  return os.str();
}

}  // namespace affuse::pipeline
