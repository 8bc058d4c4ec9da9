// affuse/pipeline/split.hpp

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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "affuse/error.hpp"
#include "affuse/pipeline/manifest.hpp"

namespace affuse::pipeline {

enum class SplitMode { kSd, kLoso };

inline std::string_view SplitModeName(SplitMode m) { return m == SplitMode::kSd ? "SD" : "LOSO"; }

inline SplitMode ParseSplitMode(std::string_view s) {
  if (s == "SD" || s == "sd") return SplitMode::kSd;
  if (s == "LOSO" || s == "loso") return SplitMode::kLoso;
  Fail(ErrorKind::kConfig, "unknown split mode '" + std::string(s) + "' (expected SD or LOSO)");
}

struct SplitPlan {
  SplitMode mode = SplitMode::kSd;
  std::vector<std::string> train_ids, dev_ids, test_ids;  // each in manifest order
  std::vector<std::string> heldout_sessions;
};

inline constexpr double kTestFraction = 0.2;
inline constexpr double kDevFraction = 0.2;  // of what remains after the test split

namespace split_internal {

// Fisher-Yates with a fixed draw rule, so the order is the same on every
// standard library.
inline void Shuffle(std::vector<std::size_t> &v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

inline std::vector<std::string> Ids(const Manifest &m, std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(m.rows[i].utterance_id);
  return out;
}

inline std::size_t Round(double x) { return static_cast<std::size_t>(std::llround(x)); }

}  // namespace split_internal

/// SD: seeded shuffle of all rows, 20% test, then 20% of the rest for dev.
/// LOSO: the held-out sessions form the test set; the rest is shuffled and
/// split 80/20 into train and dev.
inline SplitPlan MakeSplit(const Manifest &m, SplitMode mode,
                           const std::vector<std::string> &heldout_sessions, std::uint64_t seed) {
  using namespace split_internal;
  SplitPlan plan;
  plan.mode = mode;
  std::vector<std::size_t> pool, test;
  if (mode == SplitMode::kSd) {
    for (std::size_t i = 0; i < m.size(); ++i) pool.push_back(i);
    Shuffle(pool, seed);
    const std::size_t n_test = Round(kTestFraction * static_cast<double>(pool.size()));
    test.assign(pool.end() - static_cast<std::ptrdiff_t>(n_test), pool.end());
    pool.resize(pool.size() - n_test);
  } else {
    if (heldout_sessions.empty())
      Fail(ErrorKind::kConfig, "LOSO split needs at least one held-out session");
    std::set<std::string> present, held(heldout_sessions.begin(), heldout_sessions.end());
    for (const auto &r : m.rows) present.insert(r.session_id);
    for (const auto &s : held)
      if (!present.count(s)) Fail(ErrorKind::kUnknownSession, "session '" + s + "' is not in the manifest");
    std::set<std::string> test_speakers;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (held.count(m.rows[i].session_id)) {
        test.push_back(i);
        test_speakers.insert(m.rows[i].speaker_id);
      } else {
        pool.push_back(i);
      }
    }
    for (std::size_t i : pool)
      if (test_speakers.count(m.rows[i].speaker_id))
        Fail(ErrorKind::kSpeakerOverlap, "speaker '" + m.rows[i].speaker_id +
                                             "' appears in both held-out and training sessions");
    Shuffle(pool, seed);
    plan.heldout_sessions.assign(held.begin(), held.end());
  }
  const std::size_t n_dev = Round(kDevFraction * static_cast<double>(pool.size()));
  std::vector<std::size_t> dev(pool.end() - static_cast<std::ptrdiff_t>(n_dev), pool.end());
  pool.resize(pool.size() - n_dev);
  plan.train_ids = Ids(m, pool);
  plan.dev_ids = Ids(m, dev);
  plan.test_ids = Ids(m, test);
  return plan;
}

inline void WriteSplitCsv(const std::filesystem::path &path, const SplitPlan &p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out << "utterance_id,split\n";
  for (const auto &id : p.train_ids) out << csv::Quote(id) << ",train\n";
  for (const auto &id : p.dev_ids) out << csv::Quote(id) << ",dev\n";
  for (const auto &id : p.test_ids) out << csv::Quote(id) << ",test\n";
}

/// Reads a split file written by WriteSplitCsv. Mode and held-out sessions
/// are not stored there, so the plan comes back as SD with no sessions.
inline SplitPlan ReadSplitCsv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::string> f;
  std::size_t line = 0;
  if (!csv::ReadRecord(in, f, line) || f != std::vector<std::string>{"utterance_id", "split"})
    Fail(ErrorKind::kParse, path.string() + ":1: expected header utterance_id,split");
  SplitPlan p;
  std::set<std::string> seen;
  while (csv::ReadRecord(in, f, line)) {
    if (f.size() == 1 && f[0].empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line);
    if (f.size() != 2) Fail(ErrorKind::kParse, where + ": expected 2 fields");
    if (!seen.insert(f[0]).second) Fail(ErrorKind::kParse, where + ": duplicate id '" + f[0] + "'");
    if (f[1] == "train") p.train_ids.push_back(f[0]);
    else if (f[1] == "dev") p.dev_ids.push_back(f[0]);
    else if (f[1] == "test") p.test_ids.push_back(f[0]);
    else Fail(ErrorKind::kParse, where + ": unknown partition '" + f[1] + "'");
  }
  return p;
}

}  // namespace affuse::pipeline
