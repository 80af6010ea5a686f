// include/rirbench/audio.hpp

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

#ifndef RIRBENCH_AUDIO_HPP_
#define RIRBENCH_AUDIO_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "rirbench/errors.hpp"

namespace rirbench::audio {

struct SpeechTag {};
struct RirTag {};

/// A sampled signal of one or two channels, stored channel-major.
/// Tag keeps speech buffers and impulse responses from being swapped by
/// accident; convert explicitly with the converting constructor.
template <class Tag>
class BasicSignal {
 public:
  BasicSignal() = default;
  BasicSignal(int sample_rate, std::vector<std::vector<double>> channels)
      : sample_rate_(sample_rate), channels_(std::move(channels)) {}

  template <class Other>
  explicit BasicSignal(const BasicSignal<Other> &other)
      : sample_rate_(other.sample_rate()), channels_(other.channels()) {}

  static BasicSignal mono(std::vector<double> samples, int sample_rate) {
    std::vector<std::vector<double>> ch;
    ch.push_back(std::move(samples));
    return BasicSignal(sample_rate, std::move(ch));
  }

  int sample_rate() const { return sample_rate_; }
  int num_channels() const { return static_cast<int>(channels_.size()); }
  std::size_t frames() const {
    return channels_.empty() ? 0 : channels_.front().size();
  }
  bool empty() const { return frames() == 0; }

  std::span<const double> channel(int c) const { return channels_.at(c); }
  std::vector<double> &channel_mut(int c) { return channels_.at(c); }
  const std::vector<std::vector<double>> &channels() const { return channels_; }
  std::vector<std::vector<double>> &channels_mut() { return channels_; }

  /// Largest absolute sample across all channels.
  double peak() const {
    double p = 0.0;
    for (const auto &ch : channels_)
      for (double v : ch) p = std::max(p, v < 0 ? -v : v);
    return p;
  }

  /// Throws PreconditionError unless rate > 0, 1..2 equal-length non-empty
  /// channels, and every sample finite.
  void validate() const;

 private:
  int sample_rate_ = 0;
  std::vector<std::vector<double>> channels_;
};

using AudioBuffer = BasicSignal<SpeechTag>;
using ImpulseResponse = BasicSignal<RirTag>;

/// Per-sample energy averaged across channels (mono energy for stereo input).
template <class Tag>
std::vector<double> energy_mono(const BasicSignal<Tag> &s) {
  std::vector<double> e(s.frames(), 0.0);
  const double inv = 1.0 / std::max(1, s.num_channels());
  for (const auto &ch : s.channels())
    for (std::size_t i = 0; i < ch.size(); ++i) e[i] += ch[i] * ch[i] * inv;
  return e;
}

void validate_signal(int sample_rate, const std::vector<std::vector<double>> &channels);

template <class Tag>
void BasicSignal<Tag>::validate() const {
  validate_signal(sample_rate_, channels_);
}

}  // namespace rirbench::audio

#endif  // RIRBENCH_AUDIO_HPP_
