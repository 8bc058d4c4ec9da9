// affuse/pipeline/config.hpp

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
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "affuse/csv.hpp"
#include "affuse/dsp/framing.hpp"
#include "affuse/error.hpp"
#include "affuse/metrics.hpp"
#include "affuse/pipeline/split.hpp"
#include "affuse/stage1/network.hpp"
#include "affuse/svr/svr.hpp"

namespace affuse::pipeline {

inline const std::vector<std::string> kAcousticVariants = {"hsf1", "hsf2", "lldseg"};
inline const std::vector<std::string> kTextVariants = {"text", "text-bigram", "text-idf"};

/// Stage-1 defaults per modality: the acoustic net ends in tanh without
/// dropout, the text net ends linear with dropout 0.3.
inline stage1::NetConfig DefaultAcousticNet() { return {}; }

inline stage1::NetConfig DefaultTextNet() {
  stage1::NetConfig c;
  c.output_activation = stage1::Activation::kLinear;
  c.dropout_rate = 0.3;
  return c;
}

struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path dataset;  // manifest CSV
  SplitMode mode = SplitMode::kSd;
  std::vector<std::string> heldout_sessions;
  std::vector<std::string> acoustic_features = {"hsf2"};
  std::vector<std::string> text_features = {"text"};
  stage1::NetConfig acoustic_net = DefaultAcousticNet();
  stage1::NetConfig text_net = DefaultTextNet();
  MtlWeights acoustic_mtl;
  MtlWeights text_mtl;
  bool mtl_search = false;
  svr::SvrConfig svr;
  double silence_factor = 0.3;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::filesystem::path run_root = "run";

  std::filesystem::path RunDir() const { return run_root / name; }
};

namespace config_internal {

inline std::string Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

inline std::vector<std::string> List(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    const std::string item = Trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T Unsigned(const std::string &key, const std::string &v) {
  T out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    Fail(ErrorKind::kConfig, key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

inline double Real(const std::string &key, const std::string &v) {
  try {
    return csv::ParseReal(v, 0, key);
  } catch (const Error &) {
    Fail(ErrorKind::kConfig, key + ": expected a number, got '" + v + "'");
  }
}

inline bool Bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  Fail(ErrorKind::kConfig, key + ": expected true or false, got '" + v + "'");
}

inline std::string Join(const std::vector<std::string> &v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

inline std::string Num(double v) { return csv::FormatReal(v, 17); }

inline bool SetNet(stage1::NetConfig &c, const std::string &field, const std::string &key,
                   const std::string &v) {
  if (field == "hidden_layers") {
    c.hidden_layers.clear();
    for (const auto &w : List(v)) c.hidden_layers.push_back(Unsigned<std::size_t>(key, w));
  } else if (field == "hidden_activation") {
    c.hidden_activation = stage1::ParseActivation(v);
  } else if (field == "output_activation") {
    c.output_activation = stage1::ParseActivation(v);
  } else if (field == "dropout") {
    c.dropout_rate = Real(key, v);
  } else if (field == "learning_rate") {
    c.learning_rate = Real(key, v);
  } else if (field == "batch_size") {
    c.batch_size = Unsigned<std::size_t>(key, v);
  } else if (field == "max_epochs") {
    c.max_epochs = Unsigned<std::size_t>(key, v);
  } else if (field == "patience") {
    c.patience = Unsigned<std::size_t>(key, v);
  } else if (field == "shuffle") {
    c.shuffle = Bool(key, v);
  } else {
    return false;
  }
  return true;
}

inline void NetEntries(std::vector<std::pair<std::string, std::string>> &out, const std::string &prefix,
                       const stage1::NetConfig &c) {
  std::vector<std::string> widths;
  for (auto w : c.hidden_layers) widths.push_back(std::to_string(w));
  out.emplace_back(prefix + "hidden_layers", Join(widths));
  out.emplace_back(prefix + "hidden_activation", std::string(stage1::ActivationName(c.hidden_activation)));
  out.emplace_back(prefix + "output_activation", std::string(stage1::ActivationName(c.output_activation)));
  out.emplace_back(prefix + "dropout", Num(c.dropout_rate));
  out.emplace_back(prefix + "learning_rate", Num(c.learning_rate));
  out.emplace_back(prefix + "batch_size", std::to_string(c.batch_size));
  out.emplace_back(prefix + "max_epochs", std::to_string(c.max_epochs));
  out.emplace_back(prefix + "patience", std::to_string(c.patience));
  out.emplace_back(prefix + "shuffle", c.shuffle ? "true" : "false");
}

}  // namespace config_internal

/// Reads `key = value` lines; `#` starts a comment. Relative paths resolve
/// against `base_dir`. Without a `seed` key, AFFUSE_SEED is consulted.
/// Precedence for network keys: modality defaults, then `net.*`, then
/// `acoustic.net.*` / `text.net.*`. Likewise `mtl.alpha` is overridden by
/// `mtl.acoustic.alpha` and `mtl.text.alpha`.
inline ExperimentConfig ParseConfig(std::istream &in, const std::string &origin = "<config>",
                                    const std::filesystem::path &base_dir = {}) {
  using namespace config_internal;
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = Trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      Fail(ErrorKind::kConfig, origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = Trim(std::string_view(t).substr(0, eq));
    const std::string value = Trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) Fail(ErrorKind::kConfig, origin + ":" + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second)
      Fail(ErrorKind::kConfig, origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }

  ExperimentConfig c;
  std::set<std::string> used;
  auto take = [&](const std::string &key) -> const std::string * {
    const auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };
  auto path = [&](const std::string &v) {
    std::filesystem::path p(v);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };

  if (auto v = take("name")) c.name = *v;
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos || c.name == "." || c.name == "..")
    Fail(ErrorKind::kConfig, "name must be a plain directory name");
  if (auto v = take("dataset")) c.dataset = path(*v);
  else Fail(ErrorKind::kConfig, "missing required key 'dataset'");
  if (auto v = take("mode")) c.mode = ParseSplitMode(*v);
  if (auto v = take("heldout_sessions")) c.heldout_sessions = List(*v);
  if (auto v = take("acoustic_features")) c.acoustic_features = List(*v);
  if (auto v = take("text_features")) c.text_features = List(*v);
  if (auto v = take("run_root")) c.run_root = path(*v);
  else c.run_root = path("run");
  if (auto v = take("silence_factor")) c.silence_factor = Real("silence_factor", *v);
  if (auto v = take("jobs")) c.jobs = Unsigned<std::size_t>("jobs", *v);
  if (auto v = take("seed")) {
    c.seed = Unsigned<std::uint64_t>("seed", *v);
  } else if (const char *env = std::getenv("AFFUSE_SEED"); env && *env) {
    c.seed = Unsigned<std::uint64_t>("AFFUSE_SEED", env);
  }

  for (const char *scope : {"net.", "acoustic.net.", "text.net."}) {
    for (auto &[key, value] : kv) {
      if (key.rfind(scope, 0) != 0) continue;
      const std::string field = key.substr(std::string(scope).size());
      bool ok = true;
      if (std::string(scope) != "text.net.") ok = SetNet(c.acoustic_net, field, key, value);
      if (std::string(scope) != "acoustic.net.") ok = SetNet(c.text_net, field, key, value) && ok;
      if (!ok) Fail(ErrorKind::kConfig, "unknown key '" + key + "'");
      used.insert(key);
    }
  }

  if (auto v = take("mtl.search")) c.mtl_search = Bool("mtl.search", *v);
  if (auto v = take("mtl.alpha")) c.acoustic_mtl.alpha = c.text_mtl.alpha = Real("mtl.alpha", *v);
  if (auto v = take("mtl.beta")) c.acoustic_mtl.beta = c.text_mtl.beta = Real("mtl.beta", *v);
  if (auto v = take("mtl.acoustic.alpha")) c.acoustic_mtl.alpha = Real("mtl.acoustic.alpha", *v);
  if (auto v = take("mtl.acoustic.beta")) c.acoustic_mtl.beta = Real("mtl.acoustic.beta", *v);
  if (auto v = take("mtl.text.alpha")) c.text_mtl.alpha = Real("mtl.text.alpha", *v);
  if (auto v = take("mtl.text.beta")) c.text_mtl.beta = Real("mtl.text.beta", *v);

  if (auto v = take("svr.c")) c.svr.c = Real("svr.c", *v);
  if (auto v = take("svr.gamma")) c.svr.gamma = Real("svr.gamma", *v);
  if (auto v = take("svr.epsilon")) c.svr.epsilon = Real("svr.epsilon", *v);
  if (auto v = take("svr.tolerance")) c.svr.tolerance = Real("svr.tolerance", *v);
  if (auto v = take("svr.max_passes")) c.svr.max_passes = Unsigned<std::size_t>("svr.max_passes", *v);

  for (const auto &[key, value] : kv)
    if (!used.count(key)) Fail(ErrorKind::kConfig, "unknown key '" + key + "'");

  // Validation.
  ValidateWeights(c.acoustic_mtl);
  ValidateWeights(c.text_mtl);
  stage1::ValidateNetConfig(c.acoustic_net);
  stage1::ValidateNetConfig(c.text_net);
  svr::ValidateSvrConfig(c.svr);
  if (!(c.silence_factor > 0.0)) Fail(ErrorKind::kConfig, "silence_factor must be positive");
  if (c.jobs == 0) c.jobs = 1;
  if (c.acoustic_features.empty() || c.text_features.empty())
    Fail(ErrorKind::kConfig, "need at least one acoustic and one text feature variant");
  auto check = [](const std::vector<std::string> &got, const std::vector<std::string> &allowed,
                  const char *what) {
    std::set<std::string> seen;
    for (const auto &g : got) {
      if (std::find(allowed.begin(), allowed.end(), g) == allowed.end())
        Fail(ErrorKind::kConfig, std::string("unknown ") + what + " feature variant '" + g +
                                     "' (expected one of " + Join(allowed) + ")");
      if (!seen.insert(g).second)
        Fail(ErrorKind::kConfig, std::string("duplicate ") + what + " feature variant '" + g + "'");
    }
  };
  check(c.acoustic_features, kAcousticVariants, "acoustic");
  check(c.text_features, kTextVariants, "text");
  if (c.mode == SplitMode::kLoso && c.heldout_sessions.empty())
    Fail(ErrorKind::kConfig, "mode LOSO requires heldout_sessions");
  return c;
}

inline ExperimentConfig LoadConfig(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot read config " + path.string());
  return ParseConfig(in, path.string(), path.parent_path());
}

/// Every setting after defaults and overrides, in a fixed order. The dataset
/// appears by file name and jobs is left out, so reports do not depend on
/// where the run happened or how many workers it used.
inline std::vector<std::pair<std::string, std::string>> ResolvedSettings(const ExperimentConfig &c) {
  using namespace config_internal;
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("name", c.name);
  out.emplace_back("dataset", c.dataset.filename().string());
  out.emplace_back("mode", std::string(SplitModeName(c.mode)));
  out.emplace_back("heldout_sessions", Join(c.heldout_sessions));
  out.emplace_back("acoustic_features", Join(c.acoustic_features));
  out.emplace_back("text_features", Join(c.text_features));
  out.emplace_back("silence_factor", Num(c.silence_factor));
  out.emplace_back("seed", std::to_string(c.seed));
  NetEntries(out, "acoustic.net.", c.acoustic_net);
  NetEntries(out, "text.net.", c.text_net);
  out.emplace_back("mtl.search", c.mtl_search ? "true" : "false");
  out.emplace_back("mtl.acoustic.alpha", Num(c.acoustic_mtl.alpha));
  out.emplace_back("mtl.acoustic.beta", Num(c.acoustic_mtl.beta));
  out.emplace_back("mtl.text.alpha", Num(c.text_mtl.alpha));
  out.emplace_back("mtl.text.beta", Num(c.text_mtl.beta));
  out.emplace_back("svr.c", Num(c.svr.c));
  out.emplace_back("svr.gamma", Num(c.svr.gamma));
  out.emplace_back("svr.epsilon", Num(c.svr.epsilon));
  out.emplace_back("svr.tolerance", Num(c.svr.tolerance));
  out.emplace_back("svr.max_passes", std::to_string(c.svr.max_passes));
  return out;
}

}  // namespace affuse::pipeline
