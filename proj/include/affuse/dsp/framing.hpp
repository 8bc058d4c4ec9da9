// affuse/dsp/framing.hpp

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
#include <span>
#include <string>
#include <vector>

#include "affuse/dsp/wav.hpp"
#include "affuse/error.hpp"

namespace affuse::dsp {

struct FrameConfig {
  double window_length = 0.025;  // seconds
  double hop_length = 0.010;     // seconds
  double silence_factor = 0.3;   // threshold = factor * mean frame RMS
  std::size_t fft_size = 0;      // 0 selects the next power of two >= window
};

/// Frame geometry resolved against a sample rate.
struct FrameLayout {
  std::size_t window = 0;
  std::size_t hop = 0;
  std::size_t fft_size = 0;
};

inline FrameLayout ResolveLayout(const FrameConfig &cfg, int sample_rate) {
  if (!(cfg.window_length > 0.0) || !(cfg.hop_length > 0.0) ||
      cfg.hop_length > cfg.window_length)
    Fail(ErrorKind::kConfig, "frame config requires 0 < hop <= window");
  if (!(cfg.silence_factor > 0.0))
    Fail(ErrorKind::kConfig, "silence_factor must be positive");
  FrameLayout l;
  l.window = static_cast<std::size_t>(std::lround(cfg.window_length * sample_rate));
  l.hop = static_cast<std::size_t>(std::lround(cfg.hop_length * sample_rate));
  if (l.window == 0 || l.hop == 0 || l.hop > l.window)
    Fail(ErrorKind::kConfig, "frame config resolves to an empty window or hop");
  std::size_t p = 1;
  while (p < l.window) p <<= 1;
  if (cfg.fft_size == 0) {
    l.fft_size = p;
  } else {
    if (cfg.fft_size < l.window || (cfg.fft_size & (cfg.fft_size - 1)) != 0)
      Fail(ErrorKind::kConfig, "fft_size must be a power of two >= window samples");
    l.fft_size = cfg.fft_size;
  }
  return l;
}

/// floor((n - window) / hop) + 1; trailing partial frames are dropped.
inline std::size_t FrameCount(std::size_t n, std::size_t window, std::size_t hop) {
  if (n < window)
    Fail(ErrorKind::kTooShort, "signal of " + std::to_string(n) +
                                   " samples is shorter than one window (" +
                                   std::to_string(window) + ")");
  return (n - window) / hop + 1;
}

inline std::vector<std::vector<double>> FrameSignal(const Waveform &w,
                                                    const FrameConfig &cfg) {
  ValidateWaveform(w);
  const FrameLayout l = ResolveLayout(cfg, w.sample_rate);
  const std::size_t count = FrameCount(w.samples.size(), l.window, l.hop);
  std::vector<std::vector<double>> frames;
  frames.reserve(count);
  for (std::size_t f = 0; f < count; ++f) {
    const auto first = w.samples.begin() + static_cast<std::ptrdiff_t>(f * l.hop);
    frames.emplace_back(first, first + static_cast<std::ptrdiff_t>(l.window));
  }
  return frames;
}

inline double Rms(std::span<const double> frame) {
  if (frame.empty()) return 0.0;
  double acc = 0.0;
  for (double x : frame) acc += x * x;
  return std::sqrt(acc / static_cast<double>(frame.size()));
}

/// Per-frame RMS without materialising frame copies.
inline std::vector<double> FrameRms(const Waveform &w, const FrameLayout &l) {
  const std::size_t count = FrameCount(w.samples.size(), l.window, l.hop);
  std::vector<double> out(count);
  for (std::size_t f = 0; f < count; ++f)
    out[f] = Rms(std::span<const double>(w.samples).subspan(f * l.hop, l.window));
  return out;
}

/// Fraction of frames whose RMS does not exceed factor * mean RMS.
inline double SilenceRatioFromRms(std::span<const double> frame_rms,
                                  double silence_factor) {
  if (frame_rms.empty()) Fail(ErrorKind::kTooShort, "no frames");
  double mean = 0.0;
  for (double r : frame_rms) mean += r;
  mean /= static_cast<double>(frame_rms.size());
  const double threshold = silence_factor * mean;
  std::size_t silent = 0;
  for (double r : frame_rms)
    if (r <= threshold) ++silent;
  return static_cast<double>(silent) / static_cast<double>(frame_rms.size());
}

inline double SilenceRatio(const Waveform &w, const FrameConfig &cfg) {
  ValidateWaveform(w);
  const FrameLayout l = ResolveLayout(cfg, w.sample_rate);
  return SilenceRatioFromRms(FrameRms(w, l), cfg.silence_factor);
}

}  // namespace affuse::dsp
