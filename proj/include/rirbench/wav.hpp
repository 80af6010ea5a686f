// include/rirbench/wav.hpp

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

#ifndef RIRBENCH_WAV_HPP_
#define RIRBENCH_WAV_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rirbench/audio.hpp"

namespace rirbench::audio {

enum class WavFormat { kPcm16, kFloat32 };

struct WavWriteResult {
  /// Samples outside [-1, 1] that were saturated (pcm16 only).
  std::size_t clip_count = 0;
};

/// Decodes RIFF/WAVE bytes: PCM16, PCM24, or IEEE float32, mono or stereo.
/// Integer samples are divided by 2^(bits-1).
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);
AudioBuffer read_wav(const std::filesystem::path &path);

std::vector<std::uint8_t> encode_wav(const AudioBuffer &buffer, WavFormat format,
                                     WavWriteResult *result = nullptr);
WavWriteResult write_wav(const std::filesystem::path &path, const AudioBuffer &buffer,
                         WavFormat format);

inline ImpulseResponse read_rir(const std::filesystem::path &path) {
  return ImpulseResponse(read_wav(path));
}

WavFormat parse_wav_format(const std::string &name);

}  // namespace rirbench::audio

#endif  // RIRBENCH_WAV_HPP_
