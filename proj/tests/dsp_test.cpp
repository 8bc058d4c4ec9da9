// tests/dsp_test.cpp

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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "affuse/dsp/features.hpp"
#include "affuse/dsp/framing.hpp"
#include "affuse/dsp/lld.hpp"
#include "affuse/dsp/wav.hpp"

namespace affuse::dsp {
namespace {

Waveform Sine(double hz, double seconds, double amp = 1.0, int rate = 16000) {
  Waveform w;
  w.sample_rate = rate;
  const auto n = static_cast<std::size_t>(seconds * rate);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    w.samples[i] = amp * std::sin(2 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  return w;
}

// Brute-force silence ratio: explicit frame loop, no library helpers.
double BruteSilence(const Waveform &w, std::size_t win, std::size_t hop, double factor) {
  std::vector<double> rms;
  for (std::size_t start = 0; start + win <= w.samples.size(); start += hop) {
    double acc = 0;
    for (std::size_t i = start; i < start + win; ++i) acc += w.samples[i] * w.samples[i];
    rms.push_back(std::sqrt(acc / static_cast<double>(win)));
  }
  double mean = 0;
  for (double r : rms) mean += r;
  mean /= static_cast<double>(rms.size());
  double silent = 0;
  for (double r : rms) silent += r <= factor * mean ? 1 : 0;
  return silent / static_cast<double>(rms.size());
}

TEST(Framing, FrameCountExamples) {
  EXPECT_EQ(FrameCount(16000, 400, 160), 98u);
  EXPECT_EQ(FrameCount(400, 400, 160), 1u);
  EXPECT_EQ(FrameCount(400 + 3408 * 160, 400, 160), 3409u);
  EXPECT_THROW(FrameCount(399, 400, 160), Error);
}

TEST(Framing, FrameSignalMatchesCountAndContent) {
  Waveform w = Sine(100, 1.0);
  const auto frames = FrameSignal(w, FrameConfig{});
  ASSERT_EQ(frames.size(), 98u);
  EXPECT_EQ(frames[3].size(), 400u);
  EXPECT_EQ(frames[3][0], w.samples[480]);
  Waveform tiny;
  tiny.samples.assign(100, 0.1);
  try {
    FrameSignal(tiny, FrameConfig{});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTooShort);
  }
}

TEST(Framing, FrameCountSweep) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> win(1, 800), n_extra(0, 20000);
  for (int c = 0; c < 200; ++c) {
    const std::size_t window = win(rng);
    const std::size_t hop = std::uniform_int_distribution<std::size_t>(1, window)(rng);
    const std::size_t n = window + n_extra(rng);
    std::size_t brute = 0;
    for (std::size_t s = 0; s + window <= n; s += hop) ++brute;
    EXPECT_EQ(FrameCount(n, window, hop), brute);
  }
}

TEST(Framing, RejectsBadConfig) {
  FrameConfig cfg;
  cfg.hop_length = 0.03;
  EXPECT_THROW(ResolveLayout(cfg, 16000), Error);
  cfg = {};
  cfg.silence_factor = 0.0;
  EXPECT_THROW(ResolveLayout(cfg, 16000), Error);
  cfg = {};
  cfg.fft_size = 300;
  EXPECT_THROW(ResolveLayout(cfg, 16000), Error);
  EXPECT_EQ(ResolveLayout(FrameConfig{}, 16000).fft_size, 512u);
}

TEST(Rms, Examples) {
  EXPECT_EQ(Rms(std::vector<double>(64, 0.0)), 0.0);
  EXPECT_DOUBLE_EQ(Rms(std::vector<double>(64, -0.25)), 0.25);
  const Waveform s = Sine(100, 0.1);  // ten whole periods
  EXPECT_NEAR(Rms(s.samples), 1 / std::sqrt(2.0), 1e-3);
}

TEST(Silence, Examples) {
  Waveform zero;
  zero.samples.assign(16000, 0.0);
  EXPECT_DOUBLE_EQ(SilenceRatio(zero, FrameConfig{}), 1.0);

  // 100 non-overlapping frames, 40 of them silent.
  FrameConfig tiled;
  tiled.window_length = tiled.hop_length = 0.01;
  Waveform w;
  for (int f = 0; f < 100; ++f)
    w.samples.insert(w.samples.end(), 160, f % 5 < 2 ? 0.0 : 0.5);
  EXPECT_DOUBLE_EQ(SilenceRatio(w, tiled), 0.4);
}

TEST(Silence, HalfSilentSignal) {
  Waveform w = Sine(200, 2.0);
  std::fill(w.samples.begin(), w.samples.begin() + 16000, 0.0);
  const double brute = BruteSilence(w, 400, 160, 0.3);
  EXPECT_NEAR(brute, 0.5, 0.02);
  EXPECT_DOUBLE_EQ(SilenceRatio(w, FrameConfig{}), brute);
}

TEST(Silence, InvariantsOnRandomSignals) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 30; ++t) {
    Waveform w;
    w.samples.resize(8000);
    double env = 0.0;
    for (auto &x : w.samples) {
      env = 0.999 * env + 0.001 * std::abs(nd(rng));
      x = 0.2 * nd(rng) * env * (rng() % 3 == 0 ? 0.01 : 1.0);
    }
    double prev = -1.0;
    for (double factor : {0.05, 0.1, 0.3, 0.6, 1.0, 2.0}) {
      FrameConfig cfg;
      cfg.silence_factor = factor;
      const double s = SilenceRatio(w, cfg);
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, 1.0);
      EXPECT_GE(s, prev);
      prev = s;
    }
    // Power-of-two scaling is exact in floating point, so the ratio must match.
    Waveform scaled = w;
    for (auto &x : scaled.samples) x *= 4.0;
    EXPECT_EQ(SilenceRatio(w, FrameConfig{}), SilenceRatio(scaled, FrameConfig{}));
  }
}

TEST(Lld, SineF0) {
  const auto u = ExtractUtterance(Sine(440, 1.0, 0.5), FrameConfig{});
  std::size_t voiced = 0;
  for (std::size_t f = 0; f < u.llds.frames; ++f) {
    const double f0 = u.llds.at(f, kF0);
    if (f0 > 0) {
      ++voiced;
      EXPECT_NEAR(f0, 440.0, 5.0) << "frame " << f;
    }
  }
  EXPECT_EQ(voiced, u.llds.frames);
}

TEST(Lld, LowPitchedSine) {
  const auto u = ExtractUtterance(Sine(120, 0.5, 0.3), FrameConfig{});
  for (std::size_t f = 0; f < u.llds.frames; ++f) EXPECT_NEAR(u.llds.at(f, kF0), 120.0, 2.0);
}

TEST(Lld, DigitalSilence) {
  Waveform w;
  w.samples.assign(8000, 0.0);
  const auto u = ExtractUtterance(w, FrameConfig{});
  for (std::size_t f = 0; f < u.llds.frames; ++f) {
    EXPECT_EQ(u.llds.at(f, kIntensity), kIntensityFloorDb);
    EXPECT_EQ(u.llds.at(f, kF0), 0.0);
    for (double v : u.llds.row(f)) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Lld, WhiteNoiseFluxIsSmall) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  Waveform w;
  w.samples.resize(400 + 99 * 160);  // exactly 100 frames
  for (auto &x : w.samples) x = 0.1 * nd(rng);
  FrameConfig cfg;
  const auto u = ExtractUtterance(w, cfg);
  ASSERT_EQ(u.llds.frames, 100u);

  // Norm of the first frame's unit-sum magnitude spectrum, recomputed here.
  const FrameLayout l = ResolveLayout(cfg, 16000);
  std::vector<double> win(l.window);
  for (std::size_t i = 0; i < l.window; ++i)
    win[i] = w.samples[i] * (0.54 - 0.46 * std::cos(2 * std::numbers::pi * i / (l.window - 1.0)));
  RealFft fft(l.fft_size);
  std::vector<double> mag;
  fft.Magnitude(win, mag);
  double sum = 0, sq = 0;
  for (double m : mag) sum += m;
  for (double m : mag) sq += (m / sum) * (m / sum);
  const double first_norm = std::sqrt(sq);

  double mean_flux = 0;
  for (std::size_t f = 1; f < u.llds.frames; ++f) mean_flux += u.llds.at(f, kSpectralFlux);
  mean_flux /= static_cast<double>(u.llds.frames - 1);
  EXPECT_EQ(u.llds.at(0, kSpectralFlux), 0.0);
  EXPECT_LT(mean_flux, 0.05 * first_norm);
}

TEST(Lld, NoNonFiniteValuesOnRandomWaveforms) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ud(-1, 1);
  for (int t = 0; t < 40; ++t) {
    Waveform w;
    w.samples.resize(400 + rng() % 6000);
    const int kind = t % 4;
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
      double x = ud(rng);
      if (kind == 1) x *= 1e-9;
      if (kind == 2) x = (i / 500) % 2 ? 0.0 : x;
      if (kind == 3) x = std::sin(0.05 * i) * 0.9;
      w.samples[i] = x;
    }
    const auto u = ExtractUtterance(w, FrameConfig{});
    for (double v : u.llds.data) ASSERT_TRUE(std::isfinite(v));
    if (u.llds.frames >= 2) {
      for (double v : Functionals(u.llds, u.silence_ratio).values)
        ASSERT_TRUE(std::isfinite(v));
    }
  }
}

TEST(Lld, RejectsUnsupportedRate) {
  Waveform w = Sine(200, 0.5);
  w.sample_rate = 22050;
  try {
    ExtractUtterance(w, FrameConfig{});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnsupportedRate);
  }
}

TEST(Functionals, ShapesAndConstantChannel) {
  LldMatrix m;
  m.frames = 5;
  m.data.assign(5 * kNumLlds, 0.0);
  for (std::size_t f = 0; f < 5; ++f) {
    m.at(f, 0) = 2.5;
    m.at(f, 1) = static_cast<double>(f);
  }
  const auto h1 = Functionals(m, std::nullopt);
  EXPECT_EQ(h1.schema_id, "HSF1");
  EXPECT_EQ(h1.values.size(), 28u);
  EXPECT_EQ(h1.values[0], 2.5);
  EXPECT_EQ(h1.values[kNumLlds], 0.0);
  EXPECT_DOUBLE_EQ(h1.values[1], 2.0);
  EXPECT_DOUBLE_EQ(h1.values[kNumLlds + 1], std::sqrt(2.0));
  const auto h2 = Functionals(m, 0.25);
  EXPECT_EQ(h2.schema_id, "HSF2");
  EXPECT_EQ(h2.values.size(), 29u);
  EXPECT_EQ(h2.values.back(), 0.25);

  m.frames = 1;
  m.data.resize(kNumLlds);
  EXPECT_THROW(Functionals(m, std::nullopt), Error);
}

TEST(Functionals, RowPermutationInvariance) {
  const auto u = ExtractUtterance(Sine(180, 0.6, 0.4), FrameConfig{});
  LldMatrix rev = u.llds;
  for (std::size_t f = 0; f < rev.frames; ++f)
    for (std::size_t c = 0; c < kNumLlds; ++c) rev.at(f, c) = u.llds.at(rev.frames - 1 - f, c);
  const auto a = Functionals(u.llds, u.silence_ratio);
  const auto b = Functionals(rev, u.silence_ratio);
  for (std::size_t k = 0; k < a.values.size(); ++k)
    EXPECT_NEAR(a.values[k], b.values[k], 1e-9 * (1 + std::abs(a.values[k])));
}

TEST(SegmentMeans, Shape) {
  const auto u = ExtractUtterance(Sine(180, 0.6, 0.4), FrameConfig{});
  EXPECT_EQ(SegmentMeans(u.llds).values.size(), kLldSegments * kNumLlds);
}

TEST(Wav, RoundTripAndRejections) {
  Waveform w = Sine(300, 0.1, 0.5);
  const std::string pcm = EncodeWav(w, WavEncoding::kPcm16);
  const auto back = ParseWav(std::vector<unsigned char>(pcm.begin(), pcm.end()));
  ASSERT_EQ(back.samples.size(), w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    EXPECT_NEAR(back.samples[i], w.samples[i], 1.0 / 32768);
  const std::string flt = EncodeWav(w, WavEncoding::kFloat32);
  const auto backf = ParseWav(std::vector<unsigned char>(flt.begin(), flt.end()));
  EXPECT_EQ(backf.samples[10], static_cast<double>(static_cast<float>(w.samples[10])));

  std::string stereo = pcm;
  stereo[22] = 2;
  try {
    ParseWav(std::vector<unsigned char>(stereo.begin(), stereo.end()));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnsupportedFormat);
    EXPECT_NE(std::string(e.what()).find("mono"), std::string::npos);
  }
  Waveform odd = w;
  odd.sample_rate = 11025;
  const std::string o = EncodeWav(odd, WavEncoding::kPcm16);
  EXPECT_THROW(ParseWav(std::vector<unsigned char>(o.begin(), o.end())), Error);
}

TEST(FeatureCsv, DecimalRoundTripIsStable) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd;
  FeatureTable t("HSF2");
  for (int i = 0; i < 20; ++i) {
    std::vector<double> v(29);
    for (auto &x : v) x = nd(rng) * std::pow(10.0, static_cast<int>(rng() % 9) - 4);
    t.Add("utt_" + std::to_string(i), v);
  }
  std::stringstream first;
  WriteFeatureCsv(first, t);
  const FeatureTable back = ReadFeatureCsv(first);
  std::stringstream second;
  WriteFeatureCsv(second, back);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(back.schema_id(), "HSF2");
  EXPECT_EQ(back.dim(), 29u);
  for (int i = 0; i < 20; ++i)
    for (std::size_t k = 0; k < 29; ++k)
      EXPECT_NEAR(back.row(i)[k], t.row(i)[k], 1e-8 * std::abs(t.row(i)[k]));
}

}  // namespace
}  // namespace affuse::dsp
