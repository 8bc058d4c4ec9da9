// affuse/pipeline/synth.hpp

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
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "affuse/dsp/wav.hpp"
#include "affuse/error.hpp"
#include "affuse/pipeline/manifest.hpp"
#include "affuse/stage1/network.hpp"

namespace affuse::pipeline {

/// Synthetic corpus with modality-specific signal: arousal drives pitch,
/// loudness and pausing in the audio; valence drives the share of positive
/// versus negative words in the transcript; dominance mixes both.
struct SynthConfig {
  std::size_t utterances = 2000;
  std::size_t sessions = 5;
  std::size_t speakers_per_session = 2;
  int sample_rate = 16000;
  std::uint64_t seed = 0;
  std::size_t out_of_range_rows = 0;  // extra rows with a label off the 1-5 scale
  double min_seconds = 0.6;
  double max_seconds = 1.2;
};

namespace synth_internal {

inline const std::vector<std::string> kPositive = {
    "great", "happy", "love", "wonderful", "excellent", "joy", "glad", "pleasant", "delight", "fantastic",
    "nice", "awesome", "cheerful", "lovely", "thrilled", "grateful", "proud", "hopeful", "fun", "bright"};
inline const std::vector<std::string> kNegative = {
    "awful", "sad", "hate", "terrible", "horrible", "grief", "upset", "nasty", "miserable", "angry",
    "bad", "lousy", "gloomy", "ugly", "annoyed", "bitter", "ashamed", "hopeless", "boring", "dark"};
inline const std::vector<std::string> kNeutral = {
    "the", "a", "we", "went", "to", "store", "meeting", "today", "and", "it",
    "was", "about", "morning", "then", "office", "call", "car", "house", "table", "paper",
    "said", "maybe", "there", "they", "this", "that", "with", "for", "on", "time",
    "week", "plan", "city", "road", "window", "lunch", "again", "just", "after", "before"};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  double Unit() { return stage1::Unit(g_); }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Unit(); }
  std::size_t Index(std::size_t n) { return static_cast<std::size_t>(Unit() * static_cast<double>(n)); }
  // Box-Muller, for draws that match on every standard library.
  double Normal() {
    const double u1 = 1.0 - Unit(), u2 = Unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 g_;
};

inline std::uint64_t Mix(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double Clamp1(double x) { return std::min(1.0, std::max(-1.0, x)); }

}  // namespace synth_internal

struct SynthUtterance {
  ManifestRow row;
  dsp::Waveform audio;
};

/// Deterministic in (cfg.seed, index).
inline SynthUtterance SynthesizeUtterance(const SynthConfig &cfg, std::size_t index) {
  using namespace synth_internal;
  Rng rng(Mix(cfg.seed, index));
  const std::size_t per_session = (cfg.utterances + cfg.sessions - 1) / cfg.sessions;
  const std::size_t session = std::min(index / std::max<std::size_t>(per_session, 1), cfg.sessions - 1);
  const std::size_t speaker = index % cfg.speakers_per_session;

  const double arousal = rng.Uniform(-0.9, 0.9);
  const double valence = rng.Uniform(-0.9, 0.9);
  const double dominance = Clamp1(0.5 * arousal + 0.5 * valence + 0.15 * rng.Normal());

  SynthUtterance u;
  char id[64];
  std::snprintf(id, sizeof id, "Ses%02zu_S%zu_%05zu", session + 1, speaker + 1, index + 1);
  u.row.utterance_id = id;
  u.row.audio_path = std::string("wav/") + id + ".wav";
  char sess[32], spk[64];
  std::snprintf(sess, sizeof sess, "Ses%02zu", session + 1);
  std::snprintf(spk, sizeof spk, "Ses%02zu_S%zu", session + 1, speaker + 1);
  u.row.session_id = sess;
  u.row.speaker_id = spk;
  u.row.raw = {3.0 + 2.0 * valence, 3.0 + 2.0 * arousal, 3.0 + 2.0 * dominance};

  // Transcript: most words are neutral; emotive words lean with valence.
  const std::size_t words = 8 + rng.Index(9);
  std::string text;
  for (std::size_t w = 0; w < words; ++w) {
    const std::string *word;
    if (rng.Unit() < 0.6) {
      const bool positive = rng.Unit() < 0.5 * (1.0 + valence);
      const auto &list = positive ? kPositive : kNegative;
      word = &list[rng.Index(list.size())];
    } else {
      word = &kNeutral[rng.Index(kNeutral.size())];
    }
    text += (w ? " " : "") + *word;
  }
  u.row.transcript = text;

  // Audio: voiced harmonic chunks separated by pauses over a noise floor.
  const double fs = cfg.sample_rate;
  const std::size_t n = static_cast<std::size_t>(rng.Uniform(cfg.min_seconds, cfg.max_seconds) * fs);
  const double f0 = 150.0 + 60.0 * arousal + (speaker % 2 ? -25.0 : 25.0) + 5.0 * rng.Normal();
  const double amp = 0.05 * std::pow(10.0, 0.5 * arousal);
  const double pause = 0.35 - 0.2 * arousal;
  u.audio.sample_rate = cfg.sample_rate;
  u.audio.samples.assign(n, 0.0);
  std::size_t pos = 0;
  double phase = 0.0;
  while (pos < n) {
    const std::size_t voiced = static_cast<std::size_t>(rng.Uniform(0.08, 0.2) * fs);
    const double glide = rng.Uniform(-0.1, 0.1);
    for (std::size_t k = 0; k < voiced && pos + k < n; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(voiced);
      const double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * t);
      phase += 2.0 * std::numbers::pi * f0 * (1.0 + glide * (t - 0.5)) / fs;
      double s = 0.0;
      for (int h = 1; h <= 5; ++h) s += std::sin(h * phase) / h;
      u.audio.samples[pos + k] = amp * env * s;
    }
    pos += voiced;
    pos += static_cast<std::size_t>(static_cast<double>(voiced) * pause / (1.0 - pause) *
                                    rng.Uniform(0.7, 1.3));
  }
  for (double &s : u.audio.samples) s += 0.002 * rng.Normal();
  return u;
}

inline std::string SynthExperimentConfig(std::uint64_t seed) {
  return "# Synthetic fusion experiment: every acoustic x text variant pair.\n"
         "name = synthetic\n"
         "dataset = manifest.csv\n"
         "mode = SD\n"
         "acoustic_features = hsf1,hsf2,lldseg\n"
         "text_features = text,text-bigram,text-idf\n"
         "seed = " + std::to_string(seed) + "\n"
         "run_root = run\n";
}

/// Writes wav/*.wav, manifest.csv and experiment.cfg under `dir`.
inline Manifest GenerateSynthetic(const std::filesystem::path &dir, const SynthConfig &cfg) {
  if (cfg.utterances == 0 || cfg.sessions == 0 || cfg.speakers_per_session == 0)
    Fail(ErrorKind::kConfig, "synthetic corpus needs at least one utterance, session and speaker");
  if (cfg.utterances < cfg.sessions) Fail(ErrorKind::kConfig, "fewer utterances than sessions");
  if (!dsp::IsSupportedRate(cfg.sample_rate))
    Fail(ErrorKind::kUnsupportedRate, "unsupported sample rate " + std::to_string(cfg.sample_rate));
  std::error_code ec;
  std::filesystem::create_directories(dir / "wav", ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create " + (dir / "wav").string() + ": " + ec.message());
  Manifest m;
  m.base_dir = dir;
  for (std::size_t i = 0; i < cfg.utterances; ++i) {
    auto u = SynthesizeUtterance(cfg, i);
    dsp::WriteWav(dir / u.row.audio_path, u.audio, dsp::WavEncoding::kPcm16);
    m.rows.push_back(std::move(u.row));
  }
  Manifest with_bad = m;
  for (std::size_t k = 0; k < cfg.out_of_range_rows; ++k) {
    ManifestRow r = m.rows[k % m.rows.size()];
    r.utterance_id = "bad_" + std::to_string(k + 1);
    r.raw[k % kNumDims] = k % 2 ? 5.5 : 0.5;
    with_bad.rows.push_back(r);
  }
  WriteManifest(dir / "manifest.csv", with_bad);
  std::ofstream cfg_out(dir / "experiment.cfg");
  if (!cfg_out) Fail(ErrorKind::kIo, "cannot write " + (dir / "experiment.cfg").string());
  cfg_out << SynthExperimentConfig(cfg.seed);
  return m;
}

}  // namespace affuse::pipeline
