// include/rirbench/acoustics.hpp

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

#ifndef RIRBENCH_ACOUSTICS_HPP_
#define RIRBENCH_ACOUSTICS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rirbench/audio.hpp"

namespace rirbench::acoustics {

using audio::ImpulseResponse;

/// Level assigned to EDC points whose remaining energy is exactly zero.
inline constexpr double kEdcFloorDb = -300.0;
/// Onset is the first sample within this many dB of the peak amplitude.
inline constexpr double kOnsetThresholdDb = 20.0;

/// Schroeder backward-integrated energy decay, starting at the onset.
struct EnergyDecayCurve {
  std::vector<double> values_db;
  int sample_rate = 0;
  std::size_t onset_index = 0;
  /// The last 5% of the response was excluded because its level plateaued.
  bool tail_truncated = false;

  /// Deepest level the curve reaches above the floor (positive dB).
  double dynamic_range_db() const;
};

enum class DecayMethod { kT20, kT30 };
std::string to_string(DecayMethod m);

struct Rt60Estimate {
  double seconds = 0.0;
  DecayMethod method = DecayMethod::kT20;
  double t20 = 0.0;
  std::optional<double> t30;
  double dynamic_range_db = 0.0;
};

struct Clarity {
  /// nullopt encodes +inf (no energy after 50 ms).
  std::optional<double> c50_db;
  double d50 = 0.0;
};

struct AcousticParams {
  double rt60 = 0.0;
  double edt = 0.0;
  std::optional<double> c50;
  double d50 = 0.0;
  DecayMethod estimation_method = DecayMethod::kT20;
  double dynamic_range_db = 0.0;
  double t20 = 0.0;
  std::optional<double> t30;
  std::size_t onset_index = 0;
  bool tail_truncated = false;
};

std::size_t detect_onset(std::span<const double> energy);

EnergyDecayCurve energy_decay_curve(const ImpulseResponse &rir);

/// T30 when the curve reaches -35 dB, else T20; throws AnalysisError
/// "insufficient decay range" below 25 dB of range.
Rt60Estimate rt60(const ImpulseResponse &rir);
Rt60Estimate rt60(const EnergyDecayCurve &edc);

double edt(const ImpulseResponse &rir);
double edt(const EnergyDecayCurve &edc);

Clarity clarity50(const ImpulseResponse &rir);
inline std::optional<double> c50(const ImpulseResponse &rir) { return clarity50(rir).c50_db; }
inline double d50(const ImpulseResponse &rir) { return clarity50(rir).d50; }

AcousticParams analyze(const ImpulseResponse &rir);

nlohmann::json to_json(const AcousticParams &p);

/// 100 * (estimated - ground_truth) / ground_truth, sign kept.
double rt60_percent_error(double estimated, double ground_truth);

struct ErrorReport {
  std::vector<double> per_sample_errors;
  double mean_error_pct = 0.0;
  double median_error_pct = 0.0;
  std::size_t n = 0;
};

ErrorReport aggregate_errors(std::vector<double> errors);

double mean(std::span<const double> v);
double median(std::vector<double> v);

}  // namespace rirbench::acoustics

#endif  // RIRBENCH_ACOUSTICS_HPP_
