// src/room/ism.cpp

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

#include "rirbench/room.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace rirbench::room {

namespace {

const char *kAxisNames[3] = {"x", "y", "z"};

struct AxisImage {
  int index;
  double position;
  int hits_lo;
  int hits_hi;
  double gain = 1.0;  // product of wall reflection factors along this axis
};

// 1-D images along one axis. Even lattice index i puts the image at
// s + i*L; odd at -s + (i+1)*L. Wall hits come from the Allen-Berkley
// (n, p) form with n = (i + p) / 2.
AxisImage axis_image(int i, double s, double len) {
  const int p = (i % 2 != 0) ? 1 : 0;
  const int n = (i + p) / 2;
  AxisImage a;
  a.index = i;
  a.position = p ? -s + (i + 1) * len : s + i * len;
  a.hits_lo = std::abs(n - p);
  a.hits_hi = std::abs(n);
  return a;
}

int axis_bound(const ShoeboxRoom &room, int axis) {
  int bound = room.max_order.value_or(1 << 20);
  if (room.max_time) {
    const double reach = room.speed_of_sound * *room.max_time;
    bound = std::min(bound, static_cast<int>(std::ceil(reach / room.dims[axis])) + 1);
  }
  return bound;
}

// `beta` holds per-wall pressure reflection factors; null leaves gains at 1.
template <class Visit>
void for_each_image(const ShoeboxRoom &room, const std::array<double, 6> *beta, Visit &&visit) {
  std::array<std::vector<AxisImage>, 3> axes;
  for (int a = 0; a < 3; ++a) {
    const int b = axis_bound(room, a);
    for (int i = -b; i <= b; ++i) {
      auto img = axis_image(i, room.source[a], room.dims[a]);
      if (beta) {
        if (img.hits_lo) img.gain *= std::pow((*beta)[2 * a], img.hits_lo);
        if (img.hits_hi) img.gain *= std::pow((*beta)[2 * a + 1], img.hits_hi);
      }
      axes[a].push_back(img);
    }
  }
  const double max_dist = room.max_time ? room.speed_of_sound * *room.max_time
                                        : std::numeric_limits<double>::infinity();
  const double max_d2 = max_dist * max_dist;
  const int max_order = room.max_order.value_or(1 << 30);
  const auto &r = room.receiver;
  for (const auto &ix : axes[0]) {
    const double dx = ix.position - r[0];
    if (dx * dx > max_d2 || std::abs(ix.index) > max_order) continue;
    for (const auto &iy : axes[1]) {
      const double dy = iy.position - r[1];
      const double dxy = dx * dx + dy * dy;
      if (dxy > max_d2 || std::abs(ix.index) + std::abs(iy.index) > max_order) continue;
      for (const auto &iz : axes[2]) {
        const double dz = iz.position - r[2];
        const double d2 = dxy + dz * dz;
        if (d2 > max_d2) continue;
        if (std::abs(ix.index) + std::abs(iy.index) + std::abs(iz.index) > max_order) continue;
        visit(ix, iy, iz, std::sqrt(d2));
      }
    }
  }
}

}  // namespace

ShoeboxRoom ShoeboxRoom::uniform(Vec3 dims, double alpha) {
  ShoeboxRoom r;
  r.dims = dims;
  r.absorption.fill(alpha);
  for (int a = 0; a < 3; ++a) {
    r.source[a] = dims[a] / 3.0;
    r.receiver[a] = 2.0 * dims[a] / 3.0;
  }
  return r;
}

std::array<double, 6> ShoeboxRoom::wall_areas() const {
  const double yz = dims[1] * dims[2], xz = dims[0] * dims[2], xy = dims[0] * dims[1];
  return {yz, yz, xz, xz, xy, xy};
}

double ShoeboxRoom::surface_area() const {
  const auto a = wall_areas();
  double s = 0;
  for (double v : a) s += v;
  return s;
}

void ShoeboxRoom::validate_geometry() const {
  for (int a = 0; a < 3; ++a) {
    if (!(dims[a] > 0.0) || !std::isfinite(dims[a]))
      throw ParameterError(std::string("dims.") + kAxisNames[a], "must be positive");
    if (!(source[a] > 0.0 && source[a] < dims[a]))
      throw ParameterError(std::string("source.") + kAxisNames[a],
                           "must lie strictly inside the room");
    if (!(receiver[a] > 0.0 && receiver[a] < dims[a]))
      throw ParameterError(std::string("receiver.") + kAxisNames[a],
                           "must lie strictly inside the room");
  }
  if (source == receiver) throw ParameterError("receiver", "must differ from source");
  for (int w = 0; w < 6; ++w)
    if (!(absorption[w] > 0.0 && absorption[w] <= 1.0))
      throw ParameterError("absorption[" + std::to_string(w) + "]", "must be in (0, 1]");
  if (!(speed_of_sound > 0.0)) throw ParameterError("speed_of_sound", "must be positive");
}

void ShoeboxRoom::validate() const {
  validate_geometry();
  if (!max_order && !max_time)
    throw ParameterError("max_order", "either max_order or max_time is required");
  if (max_order && *max_order < 0) throw ParameterError("max_order", "must be >= 0");
  if (max_time && !(*max_time > 0.0)) throw ParameterError("max_time", "must be positive");
}

nlohmann::json to_json(const ShoeboxRoom &room) {
  nlohmann::json j;
  j["dims"] = room.dims;
  j["source"] = room.source;
  j["receiver"] = room.receiver;
  j["absorption"] = room.absorption;
  j["speed_of_sound"] = room.speed_of_sound;
  j["max_order"] = room.max_order ? nlohmann::json(*room.max_order) : nlohmann::json(nullptr);
  j["max_time"] = room.max_time ? nlohmann::json(*room.max_time) : nlohmann::json(nullptr);
  return j;
}

int ImageSource::order() const {
  return std::abs(index[0]) + std::abs(index[1]) + std::abs(index[2]);
}

std::vector<ImageSource> enumerate_images(const ShoeboxRoom &room) {
  room.validate();
  std::vector<ImageSource> out;
  for_each_image(room, nullptr, [&](const AxisImage &x, const AxisImage &y, const AxisImage &z, double) {
    ImageSource s;
    s.index = {x.index, y.index, z.index};
    s.position = {x.position, y.position, z.position};
    s.hits = {x.hits_lo, x.hits_hi, y.hits_lo, y.hits_hi, z.hits_lo, z.hits_hi};
    out.push_back(s);
  });
  return out;
}

std::uint64_t image_count_up_to_order(int n) {
  if (n < 0) return 0;
  const std::uint64_t m = static_cast<std::uint64_t>(n);
  return (2 * m + 1) * (2 * m * m + 2 * m + 3) / 3;
}

audio::ImpulseResponse simulate_shoebox(const ShoeboxRoom &room, int sample_rate) {
  room.validate();
  if (sample_rate <= 0) throw ParameterError("sample_rate", "must be positive");

  std::array<double, 6> beta;
  for (int w = 0; w < 6; ++w) beta[w] = std::sqrt(1.0 - room.absorption[w]);

  const double samples_per_meter = sample_rate / room.speed_of_sound;
  auto image_gain = [](const AxisImage &x, const AxisImage &y, const AxisImage &z) {
    return x.gain * y.gain * z.gain;
  };

  // First pass sizes the output from the latest contributing image.
  double max_delay = 0.0;
  for_each_image(room, &beta, [&](const AxisImage &x, const AxisImage &y, const AxisImage &z, double d) {
    if (d * samples_per_meter > max_delay && image_gain(x, y, z) != 0.0)
      max_delay = d * samples_per_meter;
  });
  constexpr int kHalf = kFractionalDelayHalfWidth;
  const auto length = static_cast<std::size_t>(std::ceil(max_delay)) + kHalf + 1;
  std::vector<double> h(length, 0.0);

  const double pi = std::numbers::pi;
  const double step_c = std::cos(pi / kHalf), step_s = std::sin(pi / kHalf);
  for_each_image(room, &beta, [&](const AxisImage &x, const AxisImage &y, const AxisImage &z, double d) {
    const double g = image_gain(x, y, z);
    if (g == 0.0) return;
    const double gain = g / (4.0 * pi * d);
    const double delay = d * samples_per_meter;
    const auto base = static_cast<long>(std::floor(delay));
    const double frac = delay - static_cast<double>(base);
    // sin(pi (k - delay)) alternates in sign from one integer k to the next.
    const double s0 = std::sin(pi * (-frac));
    // Window phase pi u / kHalf advances by pi / kHalf per tap; rotate
    // (cos, sin) instead of evaluating cos per tap.
    const double phase0 = pi * (static_cast<double>(-kHalf + 1) - frac) / kHalf;
    double wc = std::cos(phase0), ws = std::sin(phase0);
    for (int j = -kHalf + 1; j <= kHalf; ++j) {
      const long k = base + j;
      const double u = static_cast<double>(j) - frac;  // k - delay
      if (k >= 0 && std::abs(u) < kHalf) {
        const double sinc = (u == 0.0) ? 1.0 : ((j % 2 == 0) ? s0 : -s0) / (pi * u);
        h[static_cast<std::size_t>(k)] += gain * sinc * 0.5 * (1.0 + wc);
      }
      const double next_c = wc * step_c - ws * step_s;
      ws = ws * step_c + wc * step_s;
      wc = next_c;
    }
  });
  return audio::ImpulseResponse::mono(std::move(h), sample_rate);
}

double sabine_rt60(const ShoeboxRoom &room) {
  room.validate_geometry();
  const auto areas = room.wall_areas();
  double a = 0;
  for (int w = 0; w < 6; ++w) a += areas[w] * room.absorption[w];
  return 0.161 * room.volume() / a;
}

double eyring_rt60(const ShoeboxRoom &room) {
  room.validate_geometry();
  const auto areas = room.wall_areas();
  double a = 0;
  for (int w = 0; w < 6; ++w) a += areas[w] * room.absorption[w];
  const double s = room.surface_area();
  const double mean_alpha = a / s;
  if (mean_alpha >= 1.0) throw PreconditionError("Eyring undefined for mean absorption >= 1");
  return 0.161 * room.volume() / (-s * std::log(1.0 - mean_alpha));
}

}  // namespace rirbench::room
