// include/rirbench/dsp.hpp

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

#ifndef RIRBENCH_DSP_HPP_
#define RIRBENCH_DSP_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "rirbench/audio.hpp"

namespace rirbench::audio {

/// Linear convolution by FFT overlap-add. Output length n + m - 1.
std::vector<double> fft_convolve(std::span<const double> signal, std::span<const double> kernel);

/// Overlap-add block (FFT) size used for a kernel of the given length.
std::size_t overlap_add_block_size(std::size_t kernel_length);

/// Renders speech through a room. A mono RIR is applied to every channel of
/// the signal; a stereo RIR requires a mono signal and yields stereo.
/// Rates must match (resample first).
AudioBuffer convolve(const AudioBuffer &signal, const ImpulseResponse &rir);

/// Polyphase windowed-sinc (Kaiser) rate conversion, 32 taps per phase at
/// the lower of the two rates. Output has ceil(n * target / source) frames.
template <class Tag>
BasicSignal<Tag> resample(const BasicSignal<Tag> &buffer, int target_rate);

std::vector<double> resample_channel(std::span<const double> x, int source_rate,
                                     int target_rate);

/// The MUSHRA anchor: zero-phase 3.5 kHz Hann-windowed-sinc low-pass.
AudioBuffer lowpass_anchor(const AudioBuffer &buffer);

/// Tap count of the anchor filter at a rate (511 at 44.1/48 kHz).
std::size_t anchor_filter_taps(int sample_rate);

inline constexpr double kAnchorCutoffHz = 3500.0;
inline constexpr double kDefaultPeak = 0.9;

/// Scales so max |sample| equals target_peak. Throws on an all-zero buffer.
template <class Tag>
BasicSignal<Tag> peak_normalize(const BasicSignal<Tag> &buffer, double target_peak = kDefaultPeak);

template <class Tag>
BasicSignal<Tag> scale(const BasicSignal<Tag> &buffer, double gain) {
  BasicSignal<Tag> out = buffer;
  for (auto &ch : out.channels_mut())
    for (auto &v : ch) v *= gain;
  return out;
}

template <class Tag>
BasicSignal<Tag> resample(const BasicSignal<Tag> &buffer, int target_rate) {
  if (target_rate <= 0) throw PreconditionError("target rate must be positive");
  if (target_rate == buffer.sample_rate()) return buffer;
  std::vector<std::vector<double>> out;
  for (const auto &ch : buffer.channels())
    out.push_back(resample_channel(ch, buffer.sample_rate(), target_rate));
  return BasicSignal<Tag>(target_rate, std::move(out));
}

template <class Tag>
BasicSignal<Tag> peak_normalize(const BasicSignal<Tag> &buffer, double target_peak) {
  if (!(target_peak > 0.0)) throw PreconditionError("target peak must be positive");
  const double p = buffer.peak();
  if (p == 0.0) throw PreconditionError("silent signal");
  if (p == target_peak) return buffer;
  return scale(buffer, target_peak / p);
}

}  // namespace rirbench::audio

#endif  // RIRBENCH_DSP_HPP_
