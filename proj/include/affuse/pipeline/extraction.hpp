// affuse/pipeline/extraction.hpp

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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "affuse/dsp/features.hpp"
#include "affuse/dsp/framing.hpp"
#include "affuse/dsp/lld.hpp"
#include "affuse/dsp/wav.hpp"
#include "affuse/error.hpp"
#include "affuse/pipeline/manifest.hpp"
#include "affuse/pipeline/parallel.hpp"
#include "affuse/stage1/text_features.hpp"

namespace affuse::pipeline {

inline bool IsAcousticVariant(const std::string &v) { return v == "hsf1" || v == "hsf2" || v == "lldseg"; }
inline bool IsTextVariant(const std::string &v) {
  return v == "text" || v == "text-bigram" || v == "text-idf";
}

inline std::string SchemaFor(const std::string &variant) {
  if (variant == "hsf1") return dsp::kSchemaHsf1;
  if (variant == "hsf2") return dsp::kSchemaHsf2;
  if (variant == "lldseg") return dsp::kSchemaLldSeg;
  if (variant == "text") return stage1::TextSchemaId(stage1::TextFeaturizer::kUnigram, stage1::kTextDim);
  if (variant == "text-bigram") return stage1::TextSchemaId(stage1::TextFeaturizer::kBigram, stage1::kTextDim);
  if (variant == "text-idf") return stage1::TextSchemaId(stage1::TextFeaturizer::kIdf, stage1::kTextDim);
  Fail(ErrorKind::kConfig, "unknown feature variant '" + variant + "'");
}

/// Loads the utterance's audio, naming the utterance on failure.
inline dsp::Waveform LoadUtteranceAudio(const Manifest &m, const ManifestRow &r) {
  const auto path = m.AudioPath(r);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    Fail(ErrorKind::kMissingAudio, "utterance '" + r.utterance_id + "': audio file '" + path.string() +
                                       "' not found");
  try {
    return dsp::ReadWav(path);
  } catch (const Error &e) {
    Fail(e.kind(), "utterance '" + r.utterance_id + "': " + e.detail());
  }
}

/// Acoustic feature tables for the requested variants. Every variant is
/// derived from one LLD pass per utterance. Values are rounded to the CSV
/// precision so tables read back from disk train identically.
inline std::map<std::string, FeatureTable> ExtractAcoustic(const Manifest &m,
                                                           const std::vector<std::string> &variants,
                                                           const dsp::FrameConfig &frame,
                                                           std::size_t jobs = 1) {
  for (const auto &v : variants)
    if (!IsAcousticVariant(v)) Fail(ErrorKind::kConfig, "'" + v + "' is not an acoustic feature variant");
  std::vector<std::vector<std::vector<double>>> rows(variants.size(),
                                                     std::vector<std::vector<double>>(m.size()));
  ParallelFor(m.size(), jobs, [&](std::size_t i) {
    const auto &r = m.rows[i];
    const dsp::Waveform w = LoadUtteranceAudio(m, r);
    try {
      const auto u = dsp::ExtractUtterance(w, frame);
      for (std::size_t k = 0; k < variants.size(); ++k) {
        FeatureVector fv;
        if (variants[k] == "hsf1") fv = dsp::Functionals(u.llds, std::nullopt);
        else if (variants[k] == "hsf2") fv = dsp::Functionals(u.llds, u.silence_ratio);
        else fv = dsp::SegmentMeans(u.llds);
        rows[k][i] = RoundToCsvPrecision(std::move(fv.values));
      }
    } catch (const Error &e) {
      Fail(e.kind(), "utterance '" + r.utterance_id + "': " + e.detail());
    }
  });
  std::map<std::string, FeatureTable> out;
  for (std::size_t k = 0; k < variants.size(); ++k) {
    FeatureTable t(SchemaFor(variants[k]));
    for (std::size_t i = 0; i < m.size(); ++i) t.Add(m.rows[i].utterance_id, std::move(rows[k][i]));
    out.emplace(variants[k], std::move(t));
  }
  return out;
}

/// Hashed-embedding text features. The IDF variant is fitted on the
/// transcripts alone; labels are never read.
inline FeatureTable ExtractText(const Manifest &m, const std::string &variant, std::uint64_t hash_seed = 0) {
  if (!IsTextVariant(variant)) Fail(ErrorKind::kConfig, "'" + variant + "' is not a text feature variant");
  FeatureTable t(SchemaFor(variant));
  std::optional<stage1::IdfWeights> idf;
  if (variant == "text-idf") {
    std::vector<std::string> corpus;
    for (const auto &r : m.rows) corpus.push_back(r.transcript);
    idf.emplace(corpus);
  }
  for (const auto &r : m.rows) {
    FeatureVector fv;
    if (variant == "text") fv = stage1::HashTextFeatures(r.transcript, stage1::kTextDim, hash_seed);
    else if (variant == "text-bigram") fv = stage1::HashBigramFeatures(r.transcript, stage1::kTextDim, hash_seed);
    else fv = stage1::HashIdfFeatures(r.transcript, *idf, stage1::kTextDim, hash_seed);
    t.Add(r.utterance_id, RoundToCsvPrecision(std::move(fv.values)));
  }
  return t;
}

inline FeatureTable ExtractVariant(const Manifest &m, const std::string &variant, const dsp::FrameConfig &frame,
                                   std::size_t jobs = 1, std::uint64_t hash_seed = 0) {
  if (IsTextVariant(variant)) return ExtractText(m, variant, hash_seed);
  return std::move(ExtractAcoustic(m, {variant}, frame, jobs).at(variant));
}

}  // namespace affuse::pipeline
