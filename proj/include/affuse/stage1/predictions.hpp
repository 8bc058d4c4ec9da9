// affuse/stage1/predictions.hpp

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

#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "affuse/csv.hpp"
#include "affuse/dsp/features.hpp"
#include "affuse/metrics.hpp"
#include "affuse/stage1/network.hpp"

namespace affuse::stage1 {

/// Per-utterance V/A/D predictions for one split, in manifest order.
struct PredictionSet {
  std::vector<std::string> ids;
  std::vector<EmotionTriple> triples;
  std::string split_tag;  // "dev" or "test"

  std::size_t size() const { return ids.size(); }
};

/// Runs the model on every id, preserving the given order.
inline PredictionSet PredictSet(const RegressorModel &model, const FeatureTable &features,
                                const std::vector<std::string> &ids, const std::string &split_tag) {
  if (ids.empty()) Fail(ErrorKind::kEmptySplit, "cannot predict an empty " + split_tag + " split");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(model.input_dim()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto *row = features.Find(ids[i]);
    if (row == nullptr) Fail(ErrorKind::kMissingFeature, "no features for utterance '" + ids[i] + "'");
    if (row->size() != model.input_dim())
      Fail(ErrorKind::kShapeMismatch, "feature dimension " + std::to_string(row->size()) +
                                          " does not match model input " +
                                          std::to_string(model.input_dim()));
    for (std::size_t k = 0; k < row->size(); ++k)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (*row)[k];
  }
  PredictionSet p;
  p.ids = ids;
  p.triples = model.ForwardTriples(x);
  p.split_tag = split_tag;
  return p;
}

// Prediction CSV: utterance_id,valence,arousal,dominance,split_tag with 17
// significant digits so doubles survive the round trip exactly.
inline void WritePredictionCsv(std::ostream &out, const PredictionSet &p) {
  out << "utterance_id,valence,arousal,dominance,split_tag\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    out << csv::Quote(p.ids[i]);
    for (std::size_t d = 0; d < kNumDims; ++d) out << ',' << csv::FormatReal(p.triples[i][d], 17);
    out << ',' << p.split_tag << '\n';
  }
}

inline void WritePredictionCsv(const std::filesystem::path &path, const PredictionSet &p) {
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  WritePredictionCsv(out, p);
}

inline PredictionSet ReadPredictionCsv(std::istream &in, const std::string &origin = "<stream>") {
  std::vector<std::string> f;
  std::size_t line = 0;
  if (!csv::ReadRecord(in, f, line) || f.size() != 5 || f[0] != "utterance_id")
    Fail(ErrorKind::kParse, origin + ": expected header utterance_id,valence,arousal,dominance,split_tag");
  PredictionSet p;
  std::unordered_set<std::string> seen;
  while (csv::ReadRecord(in, f, line)) {
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 5)
      Fail(ErrorKind::kParse, origin + ": line " + std::to_string(line) + ": expected 5 fields");
    if (!seen.insert(f[0]).second)
      Fail(ErrorKind::kParse, origin + ": duplicate id '" + f[0] + "'");
    EmotionTriple t;
    for (std::size_t d = 0; d < kNumDims; ++d) t[d] = csv::ParseReal(f[d + 1], line, kDimNames[d]);
    if (p.split_tag.empty()) p.split_tag = f[4];
    else if (p.split_tag != f[4])
      Fail(ErrorKind::kParse, origin + ": mixed split tags");
    p.ids.push_back(f[0]);
    p.triples.push_back(t);
  }
  return p;
}

inline PredictionSet ReadPredictionCsv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  return ReadPredictionCsv(in, path.string());
}

}  // namespace affuse::stage1
