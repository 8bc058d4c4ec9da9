// affuse/dsp/fft.hpp

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

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace affuse::dsp {

inline std::size_t NextPow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace fft_internal {

// FFTW's planner is not thread-safe; plans are built once per size under a
// lock and then shared, since fftw_execute_dft_* on fresh arrays is.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

inline PlanPair GetPlans(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  double *in = fftw_alloc_real(n);
  fftw_complex *out = fftw_alloc_complex(n / 2 + 1);
  PlanPair p;
  p.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), out, in, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  cache.emplace(n, p);
  return p;
}

struct FftwFree {
  void operator()(void *p) const { fftw_free(p); }
};

}  // namespace fft_internal

/// Real-input FFT of a fixed power-of-two size. Each instance owns its
/// buffers, so one instance per thread is safe.
class RealFft {
 public:
  explicit RealFft(std::size_t size)
      : size_(size),
        plans_(fft_internal::GetPlans(size)),
        real_(fftw_alloc_real(size)),
        spec_(fftw_alloc_complex(size / 2 + 1)) {}

  std::size_t size() const { return size_; }
  std::size_t bins() const { return size_ / 2 + 1; }

  /// Magnitude spectrum of `frame`, zero-padded to size(). Output has bins()
  /// entries.
  void Magnitude(std::span<const double> frame, std::vector<double> &mag) {
    LoadReal(frame);
    fftw_execute_dft_r2c(plans_.forward, real_.get(), spec_.get());
    mag.resize(bins());
    for (std::size_t k = 0; k < bins(); ++k)
      mag[k] = std::hypot(spec_.get()[k][0], spec_.get()[k][1]);
  }

  /// Biased autocorrelation r[k] = sum_i x[i] x[i+k] for k < frame.size().
  /// Requires size() >= 2 * frame.size() so the circular result is linear.
  void Autocorrelation(std::span<const double> frame, std::vector<double> &acf) {
    LoadReal(frame);
    fftw_execute_dft_r2c(plans_.forward, real_.get(), spec_.get());
    for (std::size_t k = 0; k < bins(); ++k) {
      auto &c = spec_.get()[k];
      c[0] = c[0] * c[0] + c[1] * c[1];
      c[1] = 0.0;
    }
    fftw_execute_dft_c2r(plans_.inverse, spec_.get(), real_.get());
    acf.resize(frame.size());
    const double scale = 1.0 / static_cast<double>(size_);
    for (std::size_t k = 0; k < frame.size(); ++k) acf[k] = real_.get()[k] * scale;
  }

 private:
  void LoadReal(std::span<const double> frame) {
    double *r = real_.get();
    const std::size_t n = std::min(frame.size(), size_);
    for (std::size_t i = 0; i < n; ++i) r[i] = frame[i];
    for (std::size_t i = n; i < size_; ++i) r[i] = 0.0;
  }

  std::size_t size_;
  fft_internal::PlanPair plans_;
  std::unique_ptr<double, fft_internal::FftwFree> real_;
  std::unique_ptr<fftw_complex, fft_internal::FftwFree> spec_;
};

}  // namespace affuse::dsp
