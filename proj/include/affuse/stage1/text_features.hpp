// affuse/stage1/text_features.hpp

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
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "affuse/dsp/features.hpp"
#include "affuse/error.hpp"

namespace affuse::stage1 {

inline constexpr std::size_t kTextDim = 300;

/// Lower-cased ASCII tokens; anything other than letters, digits and
/// apostrophes separates tokens.
inline std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '\'' || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

inline std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Deterministic pseudo-random unit vector for a token.
inline std::vector<double> TokenVector(std::string_view token, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(Fnv1a(token) ^ (seed * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
  std::vector<double> v(dim);
  double norm = 0.0;
  while (norm == 0.0) {
    norm = 0.0;
    for (double &x : v) {
      x = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
      norm += x * x;
    }
  }
  norm = std::sqrt(norm);
  for (double &x : v) x /= norm;
  return v;
}

enum class TextFeaturizer { kUnigram, kBigram, kIdf };

inline std::string TextSchemaId(TextFeaturizer kind, std::size_t dim) {
  switch (kind) {
    case TextFeaturizer::kUnigram: return "TEXT-" + std::to_string(dim);
    case TextFeaturizer::kBigram: return "TEXT-BIGRAM-" + std::to_string(dim);
    case TextFeaturizer::kIdf: return "TEXT-IDF-" + std::to_string(dim);
  }
  return "TEXT";
}

/// Mean of hashed token vectors; the zero vector for an empty transcript.
inline FeatureVector HashTextFeatures(std::string_view transcript, std::size_t dim = kTextDim,
                                      std::uint64_t seed = 0) {
  if (dim == 0) Fail(ErrorKind::kConfig, "text feature dimension must be positive");
  FeatureVector fv{TextSchemaId(TextFeaturizer::kUnigram, dim), std::vector<double>(dim, 0.0)};
  auto tokens = Tokenize(transcript);
  if (tokens.empty()) return fv;
  // Summing in sorted order makes the mean exactly independent of word order.
  std::sort(tokens.begin(), tokens.end());
  for (const auto &t : tokens) {
    const auto v = TokenVector(t, dim, seed);
    for (std::size_t k = 0; k < dim; ++k) fv.values[k] += v[k];
  }
  for (double &x : fv.values) x /= static_cast<double>(tokens.size());
  return fv;
}

/// Unigrams plus adjacent-token bigrams, averaged.
inline FeatureVector HashBigramFeatures(std::string_view transcript, std::size_t dim = kTextDim,
                                        std::uint64_t seed = 0) {
  if (dim == 0) Fail(ErrorKind::kConfig, "text feature dimension must be positive");
  FeatureVector fv{TextSchemaId(TextFeaturizer::kBigram, dim), std::vector<double>(dim, 0.0)};
  auto terms = Tokenize(transcript);
  const std::size_t unigrams = terms.size();
  for (std::size_t i = 1; i < unigrams; ++i) terms.push_back(terms[i - 1] + ' ' + terms[i]);
  if (terms.empty()) return fv;
  std::sort(terms.begin(), terms.end());
  for (const auto &t : terms) {
    const auto v = TokenVector(t, dim, seed);
    for (std::size_t k = 0; k < dim; ++k) fv.values[k] += v[k];
  }
  for (double &x : fv.values) x /= static_cast<double>(terms.size());
  return fv;
}

/// Smoothed inverse document frequency, log((1 + N) / (1 + df)) + 1, fitted
/// on a transcript corpus. Labels are never consulted.
class IdfWeights {
 public:
  IdfWeights() = default;
  explicit IdfWeights(const std::vector<std::string> &corpus) : docs_(corpus.size()) {
    for (const auto &doc : corpus) {
      const auto tokens = Tokenize(doc);
      std::unordered_set<std::string> uniq(tokens.begin(), tokens.end());
      for (const auto &t : uniq) ++df_[t];
    }
  }
  double Weight(const std::string &token) const {
    const auto it = df_.find(token);
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((1.0 + static_cast<double>(docs_)) / (1.0 + df)) + 1.0;
  }

 private:
  std::size_t docs_ = 0;
  std::unordered_map<std::string, std::size_t> df_;
};

inline FeatureVector HashIdfFeatures(std::string_view transcript, const IdfWeights &idf,
                                     std::size_t dim = kTextDim, std::uint64_t seed = 0) {
  if (dim == 0) Fail(ErrorKind::kConfig, "text feature dimension must be positive");
  FeatureVector fv{TextSchemaId(TextFeaturizer::kIdf, dim), std::vector<double>(dim, 0.0)};
  auto tokens = Tokenize(transcript);
  std::sort(tokens.begin(), tokens.end());
  double total = 0.0;
  for (const auto &t : tokens) {
    const double w = idf.Weight(t);
    const auto v = TokenVector(t, dim, seed);
    for (std::size_t k = 0; k < dim; ++k) fv.values[k] += w * v[k];
    total += w;
  }
  if (total > 0.0)
    for (double &x : fv.values) x /= total;
  return fv;
}

}  // namespace affuse::stage1
