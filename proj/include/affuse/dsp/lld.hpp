// affuse/dsp/lld.hpp

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
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "affuse/dsp/fft.hpp"
#include "affuse/dsp/framing.hpp"
#include "affuse/dsp/wav.hpp"

namespace affuse::dsp {

/// Registered LLD channels, in column order. Adding a channel here extends
/// every derived feature schema without changing the file formats.
inline constexpr std::array<const char *, 14> kLldNames = {
    "intensity_db",    "alpha_ratio_db", "hammarberg_db", "slope_0_500",
    "slope_500_1500",  "spectral_flux",  "mfcc1",         "mfcc2",
    "mfcc3",           "mfcc4",          "f0_hz",         "hnr_db",
    "jitter",          "shimmer"};

inline constexpr std::size_t kNumLlds = kLldNames.size();

enum LldChannel : std::size_t {
  kIntensity = 0,
  kAlphaRatio,
  kHammarberg,
  kSlope0To500,
  kSlope500To1500,
  kSpectralFlux,
  kMfcc1,
  kMfcc2,
  kMfcc3,
  kMfcc4,
  kF0,
  kHnr,
  kJitter,
  kShimmer,
};

inline constexpr double kIntensityFloorDb = -120.0;
inline constexpr double kF0MinHz = 60.0;
inline constexpr double kF0MaxHz = 500.0;
inline constexpr double kVoicingThreshold = 0.3;
inline constexpr std::size_t kNumMelBands = 26;

/// Frame-by-channel matrix, row-major.
struct LldMatrix {
  std::size_t frames = 0;
  std::vector<double> data;

  static constexpr std::size_t cols() { return kNumLlds; }
  double &at(std::size_t frame, std::size_t ch) { return data[frame * kNumLlds + ch]; }
  double at(std::size_t frame, std::size_t ch) const {
    return data[frame * kNumLlds + ch];
  }
  std::span<const double> row(std::size_t frame) const {
    return std::span<const double>(data).subspan(frame * kNumLlds, kNumLlds);
  }
};

/// LLDs plus the utterance-level silence ratio, both computed in one pass.
struct UtteranceLlds {
  LldMatrix llds;
  double silence_ratio = 0.0;
};

namespace lld_internal {

inline double PowerDb(double p) { return 10.0 * std::log10(std::max(p, 1e-12)); }

inline double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Least-squares slope of dB power against frequency (kHz) over [lo, hi).
inline double BandSlope(std::span<const double> power_db, double bin_hz, double lo,
                        double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < power_db.size(); ++k) {
    const double f = static_cast<double>(k) * bin_hz;
    if (f < lo || f >= hi) continue;
    const double x = f / 1000.0;
    sx += x;
    sy += power_db[k];
    sxx += x * x;
    sxy += x * power_db[k];
    ++n;
  }
  if (n < 2) return 0.0;
  const double dn = static_cast<double>(n);
  const double den = dn * sxx - sx * sx;
  if (den <= 0.0) return 0.0;
  return (dn * sxy - sx * sy) / den;
}

}  // namespace lld_internal

/// Computes the registered LLD set for whole utterances. Holds FFT buffers,
/// so use one instance per thread.
class LldExtractor {
 public:
  LldExtractor(const FrameConfig &cfg, int sample_rate)
      : cfg_(cfg),
        sample_rate_(sample_rate),
        layout_(ResolveLayout(cfg, sample_rate)),
        spectrum_fft_(layout_.fft_size),
        acf_fft_(NextPow2(2 * layout_.window)) {
    if (!IsSupportedRate(sample_rate))
      Fail(ErrorKind::kUnsupportedRate,
           "sample rate " + std::to_string(sample_rate) + " Hz not supported");
    hamming_.resize(layout_.window);
    for (std::size_t i = 0; i < layout_.window; ++i)
      hamming_[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(layout_.window - 1));
    BuildMelBank();
  }

  const FrameLayout &layout() const { return layout_; }

  UtteranceLlds Extract(const Waveform &w) {
    ValidateWaveform(w);
    if (w.sample_rate != sample_rate_)
      Fail(ErrorKind::kUnsupportedRate, "extractor built for a different sample rate");
    const std::size_t count = FrameCount(w.samples.size(), layout_.window, layout_.hop);

    UtteranceLlds out;
    out.llds.frames = count;
    out.llds.data.assign(count * kNumLlds, 0.0);
    std::vector<double> frame_rms(count);

    const double bin_hz = static_cast<double>(sample_rate_) /
                          static_cast<double>(layout_.fft_size);
    std::vector<double> windowed(layout_.window), mag, power_db, prev_norm, norm, acf;
    double prev_f0 = 0.0, prev_peak = 0.0;

    for (std::size_t f = 0; f < count; ++f) {
      const auto frame =
          std::span<const double>(w.samples).subspan(f * layout_.hop, layout_.window);
      const double rms = Rms(frame);
      frame_rms[f] = rms;
      out.llds.at(f, kIntensity) =
          rms > 0.0 ? std::max(20.0 * std::log10(rms), kIntensityFloorDb)
                    : kIntensityFloorDb;

      for (std::size_t i = 0; i < layout_.window; ++i) windowed[i] = frame[i] * hamming_[i];
      spectrum_fft_.Magnitude(windowed, mag);
      power_db.resize(mag.size());
      for (std::size_t k = 0; k < mag.size(); ++k)
        power_db[k] = lld_internal::PowerDb(mag[k] * mag[k]);

      SpectralShape(mag, bin_hz, out.llds, f);
      out.llds.at(f, kSlope0To500) = lld_internal::BandSlope(power_db, bin_hz, 0.0, 500.0);
      out.llds.at(f, kSlope500To1500) =
          lld_internal::BandSlope(power_db, bin_hz, 500.0, 1500.0);

      // Flux over unit-sum magnitude spectra; the first frame has no predecessor.
      double mag_sum = 0.0;
      for (double m : mag) mag_sum += m;
      norm.assign(mag.size(), 0.0);
      if (mag_sum > 0.0)
        for (std::size_t k = 0; k < mag.size(); ++k) norm[k] = mag[k] / mag_sum;
      double flux = 0.0;
      if (f > 0)
        for (std::size_t k = 0; k < norm.size(); ++k) {
          const double d = norm[k] - prev_norm[k];
          flux += d * d;
        }
      out.llds.at(f, kSpectralFlux) = flux;
      prev_norm.swap(norm);

      Mfcc(mag, out.llds, f);

      const auto [f0, nccf] = Pitch(frame, acf);
      out.llds.at(f, kF0) = f0;
      const double r = std::clamp(nccf, 1e-3, 1.0 - 1e-3);
      out.llds.at(f, kHnr) = 10.0 * std::log10(r / (1.0 - r));

      double peak = 0.0;
      for (double x : frame) peak = std::max(peak, std::abs(x));
      if (f0 > 0.0 && prev_f0 > 0.0) {
        out.llds.at(f, kJitter) = std::abs(1.0 / f0 - 1.0 / prev_f0) * prev_f0;
        out.llds.at(f, kShimmer) = prev_peak > 0.0 ? std::abs(peak - prev_peak) / prev_peak : 0.0;
      }
      prev_f0 = f0;
      prev_peak = peak;
    }
    out.silence_ratio = SilenceRatioFromRms(frame_rms, cfg_.silence_factor);
    return out;
  }

 private:
  void BuildMelBank() {
    const std::size_t bins = layout_.fft_size / 2 + 1;
    const double nyquist = sample_rate_ / 2.0;
    const double mel_hi = lld_internal::HzToMel(nyquist);
    std::vector<double> edges(kNumMelBands + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
      edges[i] = lld_internal::MelToHz(mel_hi * static_cast<double>(i) /
                                       static_cast<double>(kNumMelBands + 1));
    const double bin_hz = static_cast<double>(sample_rate_) /
                          static_cast<double>(layout_.fft_size);
    mel_bank_.assign(kNumMelBands, std::vector<double>(bins, 0.0));
    for (std::size_t m = 0; m < kNumMelBands; ++m) {
      const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
      for (std::size_t k = 0; k < bins; ++k) {
        const double f = static_cast<double>(k) * bin_hz;
        double wgt = 0.0;
        if (f > lo && f <= mid) wgt = (f - lo) / (mid - lo);
        else if (f > mid && f < hi) wgt = (hi - f) / (hi - mid);
        mel_bank_[m][k] = wgt;
      }
    }
  }

  void SpectralShape(const std::vector<double> &mag, double bin_hz, LldMatrix &llds,
                     std::size_t f) const {
    double low = 0.0, high = 0.0, peak_low = 0.0, peak_high = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
      const double hz = static_cast<double>(k) * bin_hz;
      const double p = mag[k] * mag[k];
      if (hz >= 50.0 && hz < 1000.0) low += p;
      if (hz >= 1000.0 && hz < 5000.0) high += p;
      if (hz < 2000.0) peak_low = std::max(peak_low, p);
      if (hz >= 2000.0 && hz < 5000.0) peak_high = std::max(peak_high, p);
    }
    llds.at(f, kAlphaRatio) = lld_internal::PowerDb(low) - lld_internal::PowerDb(high);
    llds.at(f, kHammarberg) =
        lld_internal::PowerDb(peak_low) - lld_internal::PowerDb(peak_high);
  }

  void Mfcc(const std::vector<double> &mag, LldMatrix &llds, std::size_t f) const {
    std::array<double, kNumMelBands> log_e{};
    for (std::size_t m = 0; m < kNumMelBands; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < mag.size(); ++k) e += mel_bank_[m][k] * mag[k] * mag[k];
      log_e[m] = std::log(std::max(e, 1e-10));
    }
    const double scale = std::sqrt(2.0 / static_cast<double>(kNumMelBands));
    for (std::size_t c = 1; c <= 4; ++c) {
      double acc = 0.0;
      for (std::size_t m = 0; m < kNumMelBands; ++m)
        acc += log_e[m] * std::cos(std::numbers::pi * static_cast<double>(c) *
                                   (static_cast<double>(m) + 0.5) /
                                   static_cast<double>(kNumMelBands));
      llds.at(f, kMfcc1 + c - 1) = scale * acc;
    }
  }

  /// Returns (F0 in Hz or 0 when unvoiced, normalized correlation at the
  /// chosen lag). Candidates are local maxima of the normalized
  /// cross-correlation between the frame head and its lagged tail; the
  /// shortest lag within 90% of the best one wins to avoid octave drops.
  std::pair<double, double> Pitch(std::span<const double> frame, std::vector<double> &acf) {
    const std::size_t n = frame.size();
    acf_fft_.Autocorrelation(frame, acf);
    if (!(acf[0] > 1e-12 * static_cast<double>(n))) return {0.0, 0.0};

    const auto min_lag = static_cast<std::size_t>(
        std::floor(static_cast<double>(sample_rate_) / kF0MaxHz));
    const auto max_lag = std::min<std::size_t>(
        static_cast<std::size_t>(std::ceil(static_cast<double>(sample_rate_) / kF0MinHz)),
        n - 2);
    if (min_lag < 2 || min_lag >= max_lag) return {0.0, 0.0};

    // prefix[i] = sum_{j<i} x[j]^2
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + frame[i] * frame[i];
    auto nccf = [&](std::size_t k) {
      const double head = prefix[n - k];
      const double tail = prefix[n] - prefix[k];
      const double den = std::sqrt(head * tail);
      return den > 0.0 ? acf[k] / den : 0.0;
    };

    std::vector<double> c(max_lag + 2, 0.0);
    for (std::size_t k = min_lag - 1; k <= max_lag + 1; ++k) c[k] = nccf(k);

    double best = -1.0;
    for (std::size_t k = min_lag; k <= max_lag; ++k)
      if (c[k] >= c[k - 1] && c[k] >= c[k + 1]) best = std::max(best, c[k]);
    if (best <= 0.0) return {0.0, std::max(best, 0.0)};

    std::size_t lag = 0;
    for (std::size_t k = min_lag; k <= max_lag; ++k)
      if (c[k] >= c[k - 1] && c[k] >= c[k + 1] && c[k] >= 0.9 * best) {
        lag = k;
        break;
      }
    const double peak = c[lag];
    if (peak < kVoicingThreshold) return {0.0, peak};

    double shift = 0.0;
    const double den = c[lag - 1] - 2.0 * c[lag] + c[lag + 1];
    if (den < 0.0) shift = std::clamp(0.5 * (c[lag - 1] - c[lag + 1]) / den, -0.5, 0.5);
    return {static_cast<double>(sample_rate_) / (static_cast<double>(lag) + shift), peak};
  }

  FrameConfig cfg_;
  int sample_rate_;
  FrameLayout layout_;
  RealFft spectrum_fft_;
  RealFft acf_fft_;
  std::vector<double> hamming_;
  std::vector<std::vector<double>> mel_bank_;
};

inline UtteranceLlds ExtractUtterance(const Waveform &w, const FrameConfig &cfg) {
  ValidateWaveform(w);
  LldExtractor ex(cfg, w.sample_rate);
  return ex.Extract(w);
}

inline LldMatrix ExtractLlds(const Waveform &w, const FrameConfig &cfg) {
  return ExtractUtterance(w, cfg).llds;
}

}  // namespace affuse::dsp
