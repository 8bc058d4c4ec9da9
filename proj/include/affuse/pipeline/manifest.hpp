// affuse/pipeline/manifest.hpp

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
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "affuse/csv.hpp"
#include "affuse/error.hpp"
#include "affuse/metrics.hpp"
#include "affuse/pipeline/labels.hpp"

namespace affuse::pipeline {

inline constexpr std::array<const char *, 8> kManifestHeader = {
    "utterance_id", "audio_path", "transcript", "valence",
    "arousal",      "dominance",  "session_id", "speaker_id"};

struct ManifestRow {
  std::string utterance_id;
  std::string audio_path;  // as written; resolve with Manifest::AudioPath
  std::string transcript;
  std::array<double, kNumDims> raw{};  // five-point scale
  std::string session_id;
  std::string speaker_id;

  EmotionTriple labels() const { return ScaleTriple(raw); }
};

struct Manifest {
  std::vector<ManifestRow> rows;
  std::vector<std::string> warnings;  // one per dropped row
  std::filesystem::path base_dir;     // relative audio paths resolve here

  std::size_t size() const { return rows.size(); }
  std::filesystem::path AudioPath(const ManifestRow &r) const {
    const std::filesystem::path p(r.audio_path);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }
  std::unordered_map<std::string, std::size_t> IndexById() const {
    std::unordered_map<std::string, std::size_t> m;
    for (std::size_t i = 0; i < rows.size(); ++i) m.emplace(rows[i].utterance_id, i);
    return m;
  }
};

/// Parses a manifest. Malformed rows are Parse errors naming the line; rows
/// whose labels fall outside [1, 5] are dropped with a warning.
inline Manifest ReadManifest(std::istream &in, const std::string &origin = "<stream>") {
  Manifest m;
  std::vector<std::string> f;
  std::size_t line = 0;
  auto where = [&](std::size_t l) { return origin + ":" + std::to_string(l) + ": "; };
  if (!csv::ReadRecord(in, f, line)) Fail(ErrorKind::kParse, where(1) + "empty manifest");
  if (f.size() != kManifestHeader.size() ||
      !std::equal(f.begin(), f.end(), kManifestHeader.begin()))
    Fail(ErrorKind::kParse, where(line) + "manifest header must be utterance_id,audio_path,"
                                          "transcript,valence,arousal,dominance,session_id,speaker_id");
  std::unordered_set<std::string> seen;
  for (;;) {
    const std::size_t start = line + 1;
    if (!csv::ReadRecord(in, f, line)) break;
    if (f.empty()) continue;  // blank line
    if (f.size() != kManifestHeader.size())
      Fail(ErrorKind::kParse, where(start) + "expected 8 fields, found " + std::to_string(f.size()));
    ManifestRow r;
    r.utterance_id = f[0];
    r.audio_path = f[1];
    r.transcript = f[2];
    for (std::size_t d = 0; d < kNumDims; ++d) {
      try {
        r.raw[d] = csv::ParseReal(f[3 + d], start, kDimNames[d]);
      } catch (const Error &) {
        Fail(ErrorKind::kParse, where(start) + "bad " + std::string(kDimNames[d]) + " value '" + f[3 + d] + "'");
      }
    }
    r.session_id = f[6];
    r.speaker_id = f[7];
    if (r.utterance_id.empty()) Fail(ErrorKind::kParse, where(start) + "empty utterance_id");
    if (r.session_id.empty() || r.speaker_id.empty())
      Fail(ErrorKind::kParse, where(start) + "empty session_id or speaker_id");
    if (!seen.insert(r.utterance_id).second)
      Fail(ErrorKind::kParse, where(start) + "duplicate utterance_id '" + r.utterance_id + "'");
    bool ok = true;
    for (double v : r.raw) ok = ok && InRawRange(v);
    if (!ok) {
      m.warnings.push_back(where(start) + "dropped '" + r.utterance_id +
                           "': label outside the 1-5 scale");
      continue;
    }
    m.rows.push_back(std::move(r));
  }
  return m;
}

inline Manifest ReadManifest(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot read manifest " + path.string());
  Manifest m = ReadManifest(in, path.string());
  m.base_dir = path.parent_path();
  return m;
}

inline void WriteManifest(std::ostream &out, const Manifest &m) {
  for (std::size_t k = 0; k < kManifestHeader.size(); ++k) out << (k ? "," : "") << kManifestHeader[k];
  out << '\n';
  for (const auto &r : m.rows) {
    out << csv::Quote(r.utterance_id) << ',' << csv::Quote(r.audio_path) << ','
        << csv::QuoteAlways(r.transcript);
    for (double v : r.raw) out << ',' << csv::FormatReal(v, 17);
    out << ',' << csv::Quote(r.session_id) << ',' << csv::Quote(r.speaker_id) << '\n';
  }
}

inline void WriteManifest(const std::filesystem::path &path, const Manifest &m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  WriteManifest(out, m);
}

/// Gold labels in [-1, 1] keyed by utterance id.
inline std::unordered_map<std::string, EmotionTriple> GoldLabels(const Manifest &m) {
  std::unordered_map<std::string, EmotionTriple> g;
  for (const auto &r : m.rows) g.emplace(r.utterance_id, r.labels());
  return g;
}

}  // namespace affuse::pipeline
