// src/audio/dsp.cpp

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

#include "rirbench/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

#include "rirbench/fft.hpp"

namespace rirbench::audio {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Resampler design: cutoff at 0.47 of the lower rate, Kaiser beta 7, 16 zero
// crossings of the lower-rate sinc on each side.
constexpr double kResampleCutoff = 0.47;
constexpr double kResampleBeta = 7.0;
constexpr int kResampleHalfTaps = 16;

double kaiser(double u, double beta) {
  // u in [-1, 1]
  if (u <= -1.0 || u >= 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - u * u)) /
         std::cyl_bessel_i(0.0, beta);
}

}  // namespace

std::size_t overlap_add_block_size(std::size_t kernel_length) {
  constexpr std::size_t kCap = std::size_t{1} << 16;
  std::size_t n = std::min(next_pow2(4 * kernel_length), kCap);
  return std::max({n, next_pow2(2 * kernel_length), std::size_t{2}});
}

std::vector<double> fft_convolve(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  const std::size_t n = x.size(), m = h.size();
  const std::size_t out_len = n + m - 1;
  std::vector<double> y(out_len, 0.0);

  const std::size_t block = overlap_add_block_size(m);
  const std::size_t seg = block - m + 1;
  RealFft fft(block);
  std::vector<std::complex<double>> kernel_spec, spec;
  std::vector<double> time;
  fft.forward(h, kernel_spec);

  for (std::size_t start = 0; start < n; start += seg) {
    const std::size_t len = std::min(seg, n - start);
    fft.forward(x.subspan(start, len), spec);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= kernel_spec[k];
    fft.inverse(spec, time);
    const std::size_t valid = std::min(len + m - 1, out_len - start);
    for (std::size_t k = 0; k < valid; ++k) y[start + k] += time[k];
  }
  return y;
}

AudioBuffer convolve(const AudioBuffer &signal, const ImpulseResponse &rir) {
  signal.validate();
  rir.validate();
  if (signal.sample_rate() != rir.sample_rate())
    throw PreconditionError("sample rate mismatch: signal " +
                            std::to_string(signal.sample_rate()) + " Hz, rir " +
                            std::to_string(rir.sample_rate()) + " Hz");
  std::vector<std::vector<double>> out;
  if (rir.num_channels() == 1) {
    for (const auto &ch : signal.channels()) out.push_back(fft_convolve(ch, rir.channel(0)));
  } else {
    if (signal.num_channels() != 1)
      throw PreconditionError("stereo rir requires a mono signal");
    for (const auto &h : rir.channels()) out.push_back(fft_convolve(signal.channel(0), h));
  }
  return AudioBuffer(signal.sample_rate(), std::move(out));
}

std::vector<double> resample_channel(std::span<const double> x, int source_rate,
                                     int target_rate) {
  if (source_rate <= 0 || target_rate <= 0)
    throw PreconditionError("sample rates must be positive");
  if (source_rate == target_rate) return {x.begin(), x.end()};

  const long g = std::gcd(source_rate, target_rate);
  const long up = target_rate / g;
  const long down = source_rate / g;
  // Filter bandwidth relative to the input rate.
  const double ratio = std::min(1.0, static_cast<double>(target_rate) / source_rate);
  const double cutoff = kResampleCutoff * ratio;  // cycles per input sample
  const double half_width = kResampleHalfTaps / ratio;  // in input samples
  const long taps = static_cast<long>(std::ceil(half_width));

  // table[phase][j] weights input sample (i0 - taps + 1 + j) when the output
  // position falls at i0 + phase/up.
  std::vector<std::vector<double>> table(up, std::vector<double>(2 * taps));
  for (long ph = 0; ph < up; ++ph) {
    const double frac = static_cast<double>(ph) / up;
    for (long j = 0; j < 2 * taps; ++j) {
      const double u = frac - static_cast<double>(j - taps + 1);  // t - k
      table[ph][j] = 2.0 * cutoff * sinc(2.0 * cutoff * u) * kaiser(u / half_width, kResampleBeta);
    }
  }

  const long n = static_cast<long>(x.size());
  const long out_len = (n * up + down - 1) / down;
  std::vector<double> y(out_len, 0.0);
  for (long j = 0; j < out_len; ++j) {
    const long num = j * down;
    const long i0 = num / up;
    const auto &w = table[num % up];
    double acc = 0.0;
    const long first = i0 - taps + 1;
    const long lo = std::max(0L, first), hi = std::min(n, i0 + taps + 1);
    for (long k = lo; k < hi; ++k) acc += x[k] * w[k - first];
    y[j] = acc;
  }
  return y;
}

std::size_t anchor_filter_taps(int sample_rate) {
  if (sample_rate >= 44100 && sample_rate <= 48000) return 511;
  const auto half = static_cast<std::size_t>(std::lround(255.0 * sample_rate / 48000.0));
  return 2 * std::max<std::size_t>(half, 1) + 1;
}

AudioBuffer lowpass_anchor(const AudioBuffer &buffer) {
  buffer.validate();
  const int rate = buffer.sample_rate();
  if (rate <= 2 * kAnchorCutoffHz) throw PreconditionError("cutoff above Nyquist");

  const std::size_t taps = anchor_filter_taps(rate);
  const std::size_t half = taps / 2;
  const double fc = kAnchorCutoffHz / rate;
  std::vector<double> h(taps);
  for (std::size_t i = 0; i < taps; ++i) {
    const double t = static_cast<double>(i) - static_cast<double>(half);
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 1.0) / (taps + 1.0));
    h[i] = 2.0 * fc * sinc(2.0 * fc * t) * w;
  }
  const double dc = std::accumulate(h.begin(), h.end(), 0.0);
  for (auto &v : h) v /= dc;

  std::vector<std::vector<double>> out;
  for (const auto &ch : buffer.channels()) {
    auto full = fft_convolve(ch, h);
    out.emplace_back(full.begin() + static_cast<std::ptrdiff_t>(half),
                     full.begin() + static_cast<std::ptrdiff_t>(half + ch.size()));
  }
  return AudioBuffer(rate, std::move(out));
}

}  // namespace rirbench::audio
