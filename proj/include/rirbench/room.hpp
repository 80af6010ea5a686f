// include/rirbench/room.hpp

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

#ifndef RIRBENCH_ROOM_HPP_
#define RIRBENCH_ROOM_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"
#include "rirbench/audio.hpp"

namespace rirbench::room {

using Vec3 = std::array<double, 3>;

/// Wall order for per-wall absorption: x=0, x=Lx, y=0, y=Ly, z=0, z=Lz.
enum Wall { kX0 = 0, kX1, kY0, kY1, kZ0, kZ1 };

struct ShoeboxRoom {
  Vec3 dims{};
  Vec3 source{};
  Vec3 receiver{};
  std::array<double, 6> absorption{};
  double speed_of_sound = 343.0;
  /// Reflection order bound (sum of wall hits); at least one bound is needed.
  std::optional<int> max_order;
  /// Images whose delay exceeds this many seconds are dropped.
  std::optional<double> max_time;

  static ShoeboxRoom uniform(Vec3 dims, double alpha);

  double volume() const { return dims[0] * dims[1] * dims[2]; }
  double surface_area() const;
  /// Areas in wall order.
  std::array<double, 6> wall_areas() const;

  /// Throws ParameterError naming the offending field.
  void validate() const;
  /// Same, without requiring a max_order or max_time bound.
  void validate_geometry() const;
};

nlohmann::json to_json(const ShoeboxRoom &room);

struct ImageSource {
  std::array<int, 3> index{};  // lattice index per axis; order = sum |index|
  Vec3 position{};
  std::array<int, 6> hits{};   // reflections per wall, wall order
  int order() const;
};

/// Every image source admitted by the room's order/time bounds, in
/// deterministic lattice order.
std::vector<ImageSource> enumerate_images(const ShoeboxRoom &room);

/// Closed-form number of image sources with reflection order <= n.
std::uint64_t image_count_up_to_order(int n);

/// Image-source rendering at sample_rate. Each image adds
/// prod(beta^hits) / (4 pi d) at delay d / c through a +/-16 tap
/// Hann-windowed sinc; beta = sqrt(1 - alpha).
audio::ImpulseResponse simulate_shoebox(const ShoeboxRoom &room, int sample_rate);

/// 0.161 V / sum(S_i alpha_i).
double sabine_rt60(const ShoeboxRoom &room);
/// 0.161 V / (-S ln(1 - mean alpha)); throws when mean alpha >= 1.
double eyring_rt60(const ShoeboxRoom &room);

/// Half-width (in samples) of the fractional-delay kernel.
inline constexpr int kFractionalDelayHalfWidth = 16;

}  // namespace rirbench::room

#endif  // RIRBENCH_ROOM_HPP_
