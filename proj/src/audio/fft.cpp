// src/audio/fft.cpp

// Copyright 2026 rirbench authors

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

#include "rirbench/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <new>
#include <stdexcept>

namespace rirbench::audio {

namespace {
// FFTW's planner is not reentrant.
std::mutex &planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2) throw std::invalid_argument("FFT size must be >= 2");
  real_ = static_cast<double *>(fftw_malloc(sizeof(double) * n));
  spec_ = fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1));
  if (!real_ || !spec_) {
    fftw_free(real_);
    fftw_free(spec_);
    throw std::bad_alloc();
  }
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto *spec = static_cast<fftw_complex *>(spec_);
  plan_fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec, FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  }
  fftw_free(real_);
  fftw_free(spec_);
}

void RealFft::forward(std::span<const double> in, std::vector<std::complex<double>> &out) {
  const std::size_t m = std::min(in.size(), n_);
  std::copy_n(in.begin(), m, real_);
  std::fill(real_ + m, real_ + n_, 0.0);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  out.resize(bins());
  std::memcpy(static_cast<void *>(out.data()), spec_, sizeof(fftw_complex) * bins());
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::vector<double> &out) {
  if (in.size() != bins()) throw std::invalid_argument("inverse FFT: bin count mismatch");
  // c2r destroys its input, so it always runs on our private copy.
  std::memcpy(spec_, in.data(), sizeof(fftw_complex) * bins());
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  out.resize(n_);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i] * scale;
}

}  // namespace rirbench::audio
