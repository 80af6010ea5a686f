// src/audio/wav.cpp

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

#include "rirbench/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

namespace rirbench::audio {

void validate_signal(int sample_rate, const std::vector<std::vector<double>> &channels) {
  if (sample_rate <= 0)
    throw PreconditionError("sample rate must be positive, got " +
                            std::to_string(sample_rate));
  if (channels.empty() || channels.front().empty())
    throw PreconditionError("empty signal");
  if (channels.size() > 2)
    throw PreconditionError("at most 2 channels supported, got " +
                            std::to_string(channels.size()));
  for (const auto &ch : channels) {
    if (ch.size() != channels.front().size())
      throw PreconditionError("channels differ in length");
    for (double v : ch)
      if (!std::isfinite(v)) throw PreconditionError("non-finite sample");
  }
}

namespace {

constexpr std::uint16_t kTagPcm = 1;
constexpr std::uint16_t kTagFloat = 3;
constexpr std::uint16_t kTagExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : bytes_(b) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n, const char *what) const {
    if (remaining() < n)
      throw ParseError(std::string("truncated WAV: expected ") + what, pos_);
  }
  std::uint32_t u32(const char *what) {
    need(4, what);
    std::uint32_t v = bytes_[pos_] | (bytes_[pos_ + 1] << 8) |
                      (bytes_[pos_ + 2] << 16) |
                      (static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24);
    pos_ += 4;
    return v;
  }
  std::uint16_t u16(const char *what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::string tag(const char *what) {
    need(4, what);
    std::string t(reinterpret_cast<const char *>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return t;
  }
  void skip(std::size_t n, const char *what) {
    need(n, what);
    pos_ += n;
  }
  const std::uint8_t *here() const { return bytes_.data() + pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::string codec_name(std::uint16_t tag, std::uint16_t bits) {
  switch (tag) {
    case kTagPcm: return "PCM" + std::to_string(bits);
    case kTagFloat: return "IEEE float" + std::to_string(bits);
    case 2: return "MS ADPCM";
    case 6: return "A-law";
    case 7: return "mu-law";
    case 0x11: return "IMA ADPCM";
    case 0x55: return "MPEG layer 3";
    default: return "format tag 0x" + [tag] {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%04X", tag);
        return std::string(buf);
      }();
  }
}

void put_u16(std::vector<std::uint8_t> &out, std::uint16_t v) {
  out.push_back(v & 0xFF);
  out.push_back(v >> 8);
}
void put_u32(std::vector<std::uint8_t> &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}
void put_tag(std::vector<std::uint8_t> &out, const char *t) {
  out.insert(out.end(), t, t + 4);
}

}  // namespace

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.empty()) throw ParseError("empty WAV file", 0);
  if (r.tag("RIFF header") != "RIFF") throw ParseError("missing RIFF magic", 0);
  r.u32("RIFF size");
  if (r.tag("WAVE tag") != "WAVE") throw ParseError("missing WAVE magic", 8);

  bool have_fmt = false;
  std::uint16_t tag = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  while (true) {
    const std::size_t chunk_at = r.pos();
    std::string id = r.tag("chunk id");
    std::uint32_t size = r.u32("chunk size");
    if (id == "fmt ") {
      if (size < 16) throw ParseError("fmt chunk too small", chunk_at);
      r.need(size, "fmt chunk body");
      const std::size_t body = r.pos();
      tag = r.u16("format tag");
      channels = r.u16("channel count");
      rate = r.u32("sample rate");
      r.u32("byte rate");
      block_align = r.u16("block align");
      bits = r.u16("bits per sample");
      if (tag == kTagExtensible) {
        if (size < 40) throw ParseError("extensible fmt chunk too small", chunk_at);
        r.u16("cbSize");
        r.u16("valid bits");
        r.u32("channel mask");
        tag = r.u16("subformat");
      }
      r.skip(size - (r.pos() - body), "fmt chunk padding");
      if (size & 1) r.skip(std::min<std::size_t>(1, r.remaining()), "pad byte");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw ParseError("data chunk before fmt chunk", chunk_at);
      const bool supported = (tag == kTagPcm && (bits == 16 || bits == 24)) ||
                             (tag == kTagFloat && bits == 32);
      if (!supported)
        throw FormatError("unsupported WAV codec: " + codec_name(tag, bits));
      if (channels < 1 || channels > 2)
        throw FormatError("unsupported channel count " + std::to_string(channels));
      if (rate == 0) throw ParseError("zero sample rate", chunk_at);
      const std::size_t bytes_per = bits / 8;
      if (block_align != bytes_per * channels)
        throw ParseError("block align inconsistent with format", chunk_at);
      r.need(size, "data chunk samples");
      const std::size_t frames = size / block_align;
      if (frames == 0) throw ParseError("data chunk holds no samples", chunk_at);
      std::vector<std::vector<double>> ch(channels, std::vector<double>(frames));
      const std::uint8_t *p = r.here();
      for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t c = 0; c < channels; ++c, p += bytes_per) {
          double v;
          if (tag == kTagFloat) {
            float x;
            std::memcpy(&x, p, 4);
            v = x;
          } else if (bits == 16) {
            auto x = static_cast<std::int16_t>(p[0] | (p[1] << 8));
            v = x / 32768.0;
          } else {
            std::int32_t x = p[0] | (p[1] << 8) | (p[2] << 16);
            if (x & 0x800000) x -= 0x1000000;
            v = x / 8388608.0;
          }
          ch[c][f] = v;
        }
      }
      AudioBuffer out(static_cast<int>(rate), std::move(ch));
      return out;
    } else {
      r.skip(size, "chunk body");
      if ((size & 1) && r.remaining() > 0) r.skip(1, "pad byte");
    }
  }
}

AudioBuffer read_wav(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer &buffer, WavFormat format,
                                     WavWriteResult *result) {
  buffer.validate();
  const std::uint16_t channels = static_cast<std::uint16_t>(buffer.num_channels());
  const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const std::uint16_t block = channels * bits / 8;
  const std::size_t frames = buffer.frames();
  const std::uint32_t data_size = static_cast<std::uint32_t>(frames * block);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format == WavFormat::kPcm16 ? kTagPcm : kTagFloat);
  put_u16(out, channels);
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate()));
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate()) * block);
  put_u16(out, block);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);

  std::size_t clipped = 0;
  for (std::size_t f = 0; f < frames; ++f) {
    for (int c = 0; c < channels; ++c) {
      const double v = buffer.channel(c)[f];
      if (format == WavFormat::kFloat32) {
        const float x = static_cast<float>(v);
        std::uint32_t u;
        std::memcpy(&u, &x, 4);
        put_u32(out, u);
      } else {
        if (v > 1.0 || v < -1.0) ++clipped;
        const double scaled = std::round(v * 32768.0);
        const auto x = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
        put_u16(out, static_cast<std::uint16_t>(x));
      }
    }
  }
  if (result) result->clip_count = clipped;
  return out;
}

WavWriteResult write_wav(const std::filesystem::path &path, const AudioBuffer &buffer,
                         WavFormat format) {
  WavWriteResult res;
  const auto bytes = encode_wav(buffer, format, &res);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
  return res;
}

WavFormat parse_wav_format(const std::string &name) {
  if (name == "pcm16") return WavFormat::kPcm16;
  if (name == "float32") return WavFormat::kFloat32;
  throw PreconditionError("unknown WAV format '" + name + "' (expected pcm16 or float32)");
}

}  // namespace rirbench::audio
