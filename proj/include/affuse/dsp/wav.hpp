// affuse/dsp/wav.hpp

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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "affuse/error.hpp"

namespace affuse::dsp {

/// Mono waveform with amplitudes nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;
};

inline bool IsSupportedRate(int rate) {
  return rate == 8000 || rate == 16000 || rate == 44100 || rate == 48000;
}

inline void ValidateWaveform(const Waveform &w) {
  if (!IsSupportedRate(w.sample_rate))
    Fail(ErrorKind::kUnsupportedRate,
         "sample rate " + std::to_string(w.sample_rate) +
             " Hz not in {8000, 16000, 44100, 48000}");
  if (w.samples.empty()) Fail(ErrorKind::kTooShort, "empty waveform");
}

enum class WavEncoding { kPcm16, kFloat32 };

namespace wav_internal {

inline std::uint32_t ReadU32(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t ReadU16(const unsigned char *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void PutU32(std::string &s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void PutU16(std::string &s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace wav_internal

/// Parses a RIFF/WAVE byte buffer. Accepts mono PCM 16-bit and IEEE float
/// (32 or 64 bit); anything else, stereo included, is rejected.
inline Waveform ParseWav(const std::vector<unsigned char> &bytes,
                         const std::string &origin = "<buffer>") {
  using namespace wav_internal;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    Fail(ErrorKind::kUnsupportedFormat, origin + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char *data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char *chunk = bytes.data() + pos;
    const std::uint32_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || avail < 16)
        Fail(ErrorKind::kUnsupportedFormat, origin + ": truncated fmt chunk");
      format = ReadU16(chunk + 8);
      channels = ReadU16(chunk + 10);
      rate = ReadU32(chunk + 12);
      bits = ReadU16(chunk + 22);
      if (format == 0xFFFE && size >= 40 && avail >= 40)
        format = ReadU16(chunk + 8 + 24);  // WAVE_FORMAT_EXTENSIBLE subformat
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = std::min<std::size_t>(size, avail);
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt || data == nullptr)
    Fail(ErrorKind::kUnsupportedFormat, origin + ": missing fmt or data chunk");
  if (channels != 1)
    Fail(ErrorKind::kUnsupportedFormat,
         origin + ": expected mono audio, got " + std::to_string(channels) +
             " channels");

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  if (format == 1 && bits == 16) {
    const std::size_t n = data_size / 2;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = static_cast<std::int16_t>(ReadU16(data + 2 * i));
      w.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    const std::size_t n = data_size / 4;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      float f;
      std::memcpy(&f, data + 4 * i, 4);
      w.samples[i] = static_cast<double>(f);
    }
  } else if (format == 3 && bits == 64) {
    const std::size_t n = data_size / 8;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) std::memcpy(&w.samples[i], data + 8 * i, 8);
  } else {
    Fail(ErrorKind::kUnsupportedFormat,
         origin + ": unsupported encoding (format " + std::to_string(format) +
             ", " + std::to_string(bits) + " bits)");
  }
  ValidateWaveform(w);
  return w;
}

inline Waveform ReadWav(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return ParseWav(bytes, path.string());
}

inline std::string EncodeWav(const Waveform &w, WavEncoding enc) {
  using namespace wav_internal;
  const bool pcm = enc == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(w.samples.size() * (bits / 8));
  std::string s;
  s.reserve(44 + data_bytes);
  s += "RIFF";
  PutU32(s, 36 + data_bytes);
  s += "WAVEfmt ";
  PutU32(s, 16);
  PutU16(s, pcm ? 1 : 3);
  PutU16(s, 1);
  PutU32(s, static_cast<std::uint32_t>(w.sample_rate));
  PutU32(s, static_cast<std::uint32_t>(w.sample_rate) * (bits / 8));
  PutU16(s, bits / 8);
  PutU16(s, bits);
  s += "data";
  PutU32(s, data_bytes);
  for (double x : w.samples) {
    if (pcm) {
      const double c = std::clamp(x, -1.0, 32767.0 / 32768.0);
      const auto v = static_cast<std::int16_t>(std::lround(c * 32768.0));
      PutU16(s, static_cast<std::uint16_t>(v));
    } else {
      const float f = static_cast<float>(x);
      char b[4];
      std::memcpy(b, &f, 4);
      s.append(b, 4);
    }
  }
  return s;
}

inline void WriteWav(const std::filesystem::path &path, const Waveform &w,
                     WavEncoding enc = WavEncoding::kPcm16) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  const std::string bytes = EncodeWav(w, enc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace affuse::dsp
