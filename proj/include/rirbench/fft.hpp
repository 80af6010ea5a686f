// include/rirbench/fft.hpp

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

#ifndef RIRBENCH_FFT_HPP_
#define RIRBENCH_FFT_HPP_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace rirbench::audio {

/// Real-to-complex FFT of fixed size n (n/2+1 bins) backed by FFTW.
/// One instance per thread; construction is safe from any thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// Zero-pads (or truncates) input to n and returns n/2+1 bins.
  void forward(std::span<const double> in, std::vector<std::complex<double>> &out);
  /// Inverse, scaled by 1/n so forward followed by inverse is identity.
  void inverse(std::span<const std::complex<double>> in, std::vector<double> &out);

 private:
  std::size_t n_;
  double *real_ = nullptr;
  void *spec_ = nullptr;
  void *plan_fwd_ = nullptr;
  void *plan_inv_ = nullptr;
};

}  // namespace rirbench::audio

#endif  // RIRBENCH_FFT_HPP_
