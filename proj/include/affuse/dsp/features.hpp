// affuse/dsp/features.hpp

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

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "affuse/csv.hpp"
#include "affuse/dsp/lld.hpp"
#include "affuse/error.hpp"

namespace affuse {

/// Fixed-length per-utterance feature vector tagged with its schema
/// (HSF1, HSF2, LLDSEG4, TEXT-300, ...).
struct FeatureVector {
  std::string schema_id;
  std::vector<double> values;
};

/// Feature vectors for a set of utterances sharing one schema.
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(std::string schema_id) : schema_id_(std::move(schema_id)) {}

  const std::string &schema_id() const { return schema_id_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string> &ids() const { return ids_; }
  const std::vector<double> &row(std::size_t i) const { return rows_[i]; }

  void Add(const std::string &id, std::vector<double> values) {
    if (ids_.empty()) dim_ = values.size();
    if (values.size() != dim_)
      Fail(ErrorKind::kShapeMismatch, "feature row '" + id + "' has " +
                                          std::to_string(values.size()) +
                                          " values, schema expects " + std::to_string(dim_));
    if (!index_.emplace(id, ids_.size()).second)
      Fail(ErrorKind::kParse, "duplicate utterance id '" + id + "' in feature table");
    ids_.push_back(id);
    rows_.push_back(std::move(values));
  }

  const std::vector<double> *Find(const std::string &id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &rows_[it->second];
  }

 private:
  std::string schema_id_;
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<std::vector<double>> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Values are written with 9 significant digits; reading a file back and
/// writing it again reproduces it byte for byte.
inline void WriteFeatureCsv(std::ostream &out, const FeatureTable &t) {
  out << "utterance_id,schema_id";
  for (std::size_t k = 1; k <= t.dim(); ++k) out << ",v" << k;
  out << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << csv::Quote(t.ids()[i]) << ',' << csv::Quote(t.schema_id());
    for (double v : t.row(i)) out << ',' << csv::FormatReal(v, 9);
    out << '\n';
  }
}

inline void WriteFeatureCsv(const std::filesystem::path &path, const FeatureTable &t) {
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  WriteFeatureCsv(out, t);
}

inline FeatureTable ReadFeatureCsv(std::istream &in) {
  std::vector<std::string> f;
  std::size_t line = 0;
  if (!csv::ReadRecord(in, f, line) || f.size() < 2 || f[0] != "utterance_id" ||
      f[1] != "schema_id")
    Fail(ErrorKind::kParse, "feature file must start with 'utterance_id,schema_id,v1..'");
  const std::size_t dim = f.size() - 2;
  std::optional<FeatureTable> table;
  while (csv::ReadRecord(in, f, line)) {
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != dim + 2)
      Fail(ErrorKind::kParse, "line " + std::to_string(line) + ": expected " +
                                  std::to_string(dim + 2) + " fields, got " +
                                  std::to_string(f.size()));
    if (!table) table.emplace(f[1]);
    if (f[1] != table->schema_id())
      Fail(ErrorKind::kParse, "line " + std::to_string(line) + ": mixed schema ids");
    std::vector<double> v(dim);
    for (std::size_t k = 0; k < dim; ++k) v[k] = csv::ParseReal(f[k + 2], line, "feature");
    table->Add(f[0], std::move(v));
  }
  if (!table) return FeatureTable("EMPTY");
  return *std::move(table);
}

inline FeatureTable ReadFeatureCsv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  return ReadFeatureCsv(in);
}

/// Rounds every value to what the CSV interchange format would store.
inline std::vector<double> RoundToCsvPrecision(std::vector<double> v) {
  for (double &x : v) x = std::stod(csv::FormatReal(x, 9));
  return v;
}

}  // namespace affuse

namespace affuse::dsp {

inline constexpr const char *kSchemaHsf1 = "HSF1";
inline constexpr const char *kSchemaHsf2 = "HSF2";
inline constexpr const char *kSchemaLldSeg = "LLDSEG4";
inline constexpr std::size_t kLldSegments = 4;

/// Per-channel mean and population standard deviation, optionally followed
/// by the silence ratio: [mean_1..mean_L, std_1..std_L(, silence)].
inline FeatureVector Functionals(const LldMatrix &llds, std::optional<double> silence) {
  if (llds.frames < 2)
    Fail(ErrorKind::kTooFewFrames, "functionals need at least 2 frames, got " +
                                       std::to_string(llds.frames));
  const std::size_t L = kNumLlds;
  FeatureVector fv;
  fv.schema_id = silence ? kSchemaHsf2 : kSchemaHsf1;
  fv.values.assign(2 * L + (silence ? 1 : 0), 0.0);
  const double n = static_cast<double>(llds.frames);
  for (std::size_t c = 0; c < L; ++c) {
    double mean = 0.0;
    for (std::size_t f = 0; f < llds.frames; ++f) mean += llds.at(f, c);
    mean /= n;
    double var = 0.0;
    for (std::size_t f = 0; f < llds.frames; ++f) {
      const double d = llds.at(f, c) - mean;
      var += d * d;
    }
    fv.values[c] = mean;
    fv.values[L + c] = std::sqrt(var / n);
  }
  if (silence) fv.values[2 * L] = *silence;
  return fv;
}

/// Fixed-length summary of the LLD trajectory: channel means over
/// kLldSegments equal time segments, segment-major.
inline FeatureVector SegmentMeans(const LldMatrix &llds) {
  if (llds.frames < kLldSegments)
    Fail(ErrorKind::kTooFewFrames, "segment means need at least " +
                                       std::to_string(kLldSegments) + " frames");
  FeatureVector fv;
  fv.schema_id = kSchemaLldSeg;
  fv.values.assign(kLldSegments * kNumLlds, 0.0);
  for (std::size_t s = 0; s < kLldSegments; ++s) {
    const std::size_t begin = s * llds.frames / kLldSegments;
    const std::size_t end = (s + 1) * llds.frames / kLldSegments;
    for (std::size_t c = 0; c < kNumLlds; ++c) {
      double acc = 0.0;
      for (std::size_t f = begin; f < end; ++f) acc += llds.at(f, c);
      fv.values[s * kNumLlds + c] = acc / static_cast<double>(end - begin);
    }
  }
  return fv;
}

}  // namespace affuse::dsp
