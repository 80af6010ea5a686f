// src/speech/stoi.cpp

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

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <complex>
#include <numbers>

#include "rirbench/dsp.hpp"
#include "rirbench/fft.hpp"
#include "rirbench/speech.hpp"

namespace rirbench::speech {

namespace {

constexpr double kEps = DBL_EPSILON;

std::vector<double> hann_inner(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) /
                                static_cast<double>(n + 1));
  return w;
}

// Frame starts are 0, hop, ... strictly below len - frame.
std::size_t frame_count(std::size_t len, std::size_t frame, std::size_t hop) {
  return len > frame ? (len - frame - 1) / hop + 1 : 0;
}

void remove_silent_frames(std::vector<double> &x, std::vector<double> &y) {
  const std::size_t frame = kStoiFrame, hop = kStoiFrame / 2;
  const auto w = hann_inner(frame);
  const std::size_t nf = frame_count(x.size(), frame, hop);
  if (nf == 0) throw PreconditionError("signal too short for STOI");
  std::vector<double> energy(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    double s = 0.0;
    for (std::size_t i = 0; i < frame; ++i) {
      const double v = w[i] * x[f * hop + i];
      s += v * v;
    }
    energy[f] = 20.0 * std::log10(std::sqrt(s) + kEps);
  }
  const double top = *std::max_element(energy.begin(), energy.end());
  std::vector<std::size_t> keep;
  for (std::size_t f = 0; f < nf; ++f)
    if (top - kStoiDynRange - energy[f] < 0.0) keep.push_back(f);

  const std::size_t out_len = (keep.size() - 1) * hop + frame;
  std::vector<double> xo(out_len, 0.0), yo(out_len, 0.0);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const std::size_t src = keep[k] * hop, dst = k * hop;
    for (std::size_t i = 0; i < frame; ++i) {
      xo[dst + i] += w[i] * x[src + i];
      yo[dst + i] += w[i] * y[src + i];
    }
  }
  x = std::move(xo);
  y = std::move(yo);
}

// Band index ranges [lo, hi) over rfft bins.
std::vector<std::pair<std::size_t, std::size_t>> third_octave_bands() {
  const std::size_t bins = kStoiFft / 2 + 1;
  auto nearest = [&](double hz) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * kStoiRate / static_cast<double>(kStoiFft);
      const double d = (f - hz) * (f - hz);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    return best;
  };
  std::vector<std::pair<std::size_t, std::size_t>> bands;
  for (std::size_t b = 0; b < kStoiBands; ++b) {
    const double k = static_cast<double>(b);
    bands.emplace_back(nearest(kStoiMinFreq * std::pow(2.0, (2 * k - 1) / 6)),
                       nearest(kStoiMinFreq * std::pow(2.0, (2 * k + 1) / 6)));
  }
  return bands;
}

// [band][frame] envelope magnitudes.
std::vector<std::vector<double>> band_envelopes(const std::vector<double> &x) {
  const std::size_t frame = kStoiFrame, hop = kStoiFrame / 2;
  const std::size_t nf = frame_count(x.size(), frame, hop);
  static const auto bands = third_octave_bands();
  const auto w = hann_inner(frame);
  audio::RealFft fft(kStoiFft);
  std::vector<double> buf(frame);
  std::vector<std::complex<double>> spec;
  std::vector<std::vector<double>> tob(kStoiBands, std::vector<double>(nf));
  for (std::size_t f = 0; f < nf; ++f) {
    for (std::size_t i = 0; i < frame; ++i) buf[i] = w[i] * x[f * hop + i];
    fft.forward(buf, spec);
    for (std::size_t b = 0; b < kStoiBands; ++b) {
      double e = 0.0;
      for (std::size_t k = bands[b].first; k < bands[b].second; ++k) e += std::norm(spec[k]);
      tob[b][f] = std::sqrt(e);
    }
  }
  return tob;
}

double norm2(const std::vector<double> &v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

}  // namespace

double stoi_10k(std::span<const double> clean, std::span<const double> degraded) {
  if (clean.size() != degraded.size())
    throw PreconditionError("STOI inputs differ in length: " + std::to_string(clean.size()) +
                            " vs " + std::to_string(degraded.size()));
  std::vector<double> x(clean.begin(), clean.end()), y(degraded.begin(), degraded.end());
  remove_silent_frames(x, y);
  const auto xt = band_envelopes(x);
  const auto yt = band_envelopes(y);
  const std::size_t nf = xt.front().size();
  if (nf < kStoiSegment) throw PreconditionError("signal too short for STOI");

  const double clip = std::pow(10.0, -kStoiBeta / 20.0);
  const std::size_t segments = nf - kStoiSegment + 1;
  double total = 0.0;
  std::vector<double> xs(kStoiSegment), ys(kStoiSegment);
  for (std::size_t m = 0; m < segments; ++m) {
    for (std::size_t b = 0; b < kStoiBands; ++b) {
      std::copy_n(xt[b].begin() + static_cast<std::ptrdiff_t>(m), kStoiSegment, xs.begin());
      std::copy_n(yt[b].begin() + static_cast<std::ptrdiff_t>(m), kStoiSegment, ys.begin());
      const double alpha = norm2(xs) / (norm2(ys) + kEps);
      for (std::size_t i = 0; i < kStoiSegment; ++i)
        ys[i] = std::min(ys[i] * alpha, xs[i] * (1.0 + clip));
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < kStoiSegment; ++i) {
        mx += xs[i];
        my += ys[i];
      }
      mx /= kStoiSegment;
      my /= kStoiSegment;
      for (std::size_t i = 0; i < kStoiSegment; ++i) {
        xs[i] -= mx;
        ys[i] -= my;
      }
      const double nx = norm2(xs) + kEps, ny = norm2(ys) + kEps;
      double c = 0.0;
      for (std::size_t i = 0; i < kStoiSegment; ++i) c += (xs[i] / nx) * (ys[i] / ny);
      total += c;
    }
  }
  return total / static_cast<double>(segments * kStoiBands);
}

namespace {

std::vector<double> mono_at_10k(const audio::AudioBuffer &b) {
  b.validate();
  std::vector<double> mono(b.frames(), 0.0);
  for (int c = 0; c < b.num_channels(); ++c) {
    const auto ch = b.channel(c);
    for (std::size_t i = 0; i < mono.size(); ++i) mono[i] += ch[i];
  }
  for (double &v : mono) v /= static_cast<double>(b.num_channels());
  if (b.sample_rate() == kStoiRate) return mono;
  return audio::resample_channel(mono, b.sample_rate(), kStoiRate);
}

}  // namespace

double stoi(const audio::AudioBuffer &clean, const audio::AudioBuffer &degraded) {
  const auto x = mono_at_10k(clean);
  auto y = mono_at_10k(degraded);
  y.resize(x.size(), 0.0);
  return stoi_10k(x, y);
}

}  // namespace rirbench::speech
