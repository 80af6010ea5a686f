// src/acoustics/acoustics.cpp

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

#include "rirbench/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rirbench::acoustics {

namespace {

// Tail plateau rule: compare the last 5% against the 5% before it.
constexpr double kTailFraction = 0.05;
constexpr double kPlateauDb = 1.0;

struct Fit {
  double slope = 0.0;
  std::size_t points = 0;
};

// Least-squares slope (dB/s) of the curve restricted to [lo_db, hi_db].
Fit fit_decay(const EnergyDecayCurve &edc, double hi_db, double lo_db) {
  double st = 0, sv = 0, stt = 0, stv = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < edc.values_db.size(); ++i) {
    const double v = edc.values_db[i];
    if (v > hi_db) continue;
    if (v < lo_db) break;
    const double t = static_cast<double>(i) / edc.sample_rate;
    st += t;
    sv += v;
    stt += t * t;
    stv += t * v;
    ++n;
  }
  Fit f;
  f.points = n;
  if (n < 2) return f;
  const double denom = n * stt - st * st;
  if (denom <= 0) return f;
  f.slope = (n * stv - st * sv) / denom;
  return f;
}

double decay_time(const EnergyDecayCurve &edc, double hi_db, double lo_db, const char *what) {
  const Fit f = fit_decay(edc, hi_db, lo_db);
  if (f.points < 2 || !(f.slope < 0))
    throw AnalysisError(std::string("cannot fit ") + what + " decay line");
  return -60.0 / f.slope;
}

}  // namespace

std::string to_string(DecayMethod m) { return m == DecayMethod::kT30 ? "T30" : "T20"; }

double EnergyDecayCurve::dynamic_range_db() const {
  double lowest = 0.0;
  for (double v : values_db)
    if (v > kEdcFloorDb) lowest = std::min(lowest, v);
  return -lowest;
}

std::size_t detect_onset(std::span<const double> energy) {
  const double peak = *std::max_element(energy.begin(), energy.end());
  const double threshold = peak * std::pow(10.0, -kOnsetThresholdDb / 10.0);
  for (std::size_t i = 0; i < energy.size(); ++i)
    if (energy[i] >= threshold) return i;
  return 0;
}

EnergyDecayCurve energy_decay_curve(const ImpulseResponse &rir) {
  rir.validate();
  const auto e = audio::energy_mono(rir);
  const double total = std::accumulate(e.begin(), e.end(), 0.0);
  if (!(total > 0.0)) throw AnalysisError("silent impulse response");

  EnergyDecayCurve edc;
  edc.sample_rate = rir.sample_rate();
  edc.onset_index = detect_onset(e);

  std::size_t end = e.size();
  const std::size_t span_len = end - edc.onset_index;
  const auto window = static_cast<std::size_t>(span_len * kTailFraction);
  if (window >= 1 && span_len >= 2 * window) {
    const double last = std::accumulate(e.end() - window, e.end(), 0.0);
    const double prev = std::accumulate(e.end() - 2 * window, e.end() - window, 0.0);
    if (last > 0 && prev > 0 && 10.0 * std::log10(last / prev) > -kPlateauDb) {
      end -= window;
      edc.tail_truncated = true;
    }
  }

  const std::size_t len = end - edc.onset_index;
  std::vector<double> remaining(len);
  double acc = 0.0;
  for (std::size_t i = len; i-- > 0;) {
    acc += e[edc.onset_index + i];
    remaining[i] = acc;
  }
  edc.values_db.resize(len);
  const double ref = remaining[0];
  for (std::size_t i = 0; i < len; ++i) {
    edc.values_db[i] = remaining[i] > 0.0
                           ? std::max(kEdcFloorDb, 10.0 * std::log10(remaining[i] / ref))
                           : kEdcFloorDb;
  }
  edc.values_db[0] = 0.0;
  return edc;
}

Rt60Estimate rt60(const EnergyDecayCurve &edc) {
  Rt60Estimate est;
  est.dynamic_range_db = edc.dynamic_range_db();
  if (est.dynamic_range_db < 25.0)
    throw AnalysisError("insufficient decay range: " + std::to_string(est.dynamic_range_db) +
                        " dB measured, 25 dB required");
  est.t20 = decay_time(edc, -5.0, -25.0, "T20");
  est.seconds = est.t20;
  if (est.dynamic_range_db >= 35.0) {
    est.t30 = decay_time(edc, -5.0, -35.0, "T30");
    est.seconds = *est.t30;
    est.method = DecayMethod::kT30;
  }
  return est;
}

Rt60Estimate rt60(const ImpulseResponse &rir) { return rt60(energy_decay_curve(rir)); }

double edt(const EnergyDecayCurve &edc) {
  if (edc.dynamic_range_db() < 10.0) throw AnalysisError("EDC never reaches -10 dB");
  return decay_time(edc, 0.0, -10.0, "EDT");
}

double edt(const ImpulseResponse &rir) { return edt(energy_decay_curve(rir)); }

Clarity clarity50(const ImpulseResponse &rir) {
  rir.validate();
  const auto e = audio::energy_mono(rir);
  const double total = std::accumulate(e.begin(), e.end(), 0.0);
  if (!(total > 0.0)) throw AnalysisError("silent impulse response");
  const std::size_t onset = detect_onset(e);
  const auto n50 = static_cast<std::size_t>(std::lround(0.05 * rir.sample_rate()));
  if (onset + n50 > e.size())
    throw AnalysisError("impulse response ends before onset + 50 ms");
  const auto split = e.begin() + static_cast<std::ptrdiff_t>(onset + n50);
  const double early = std::accumulate(e.begin() + static_cast<std::ptrdiff_t>(onset), split, 0.0);
  const double late = std::accumulate(split, e.end(), 0.0);
  Clarity c;
  if (late == 0.0) {
    c.d50 = 1.0;
  } else {
    c.d50 = early / (early + late);
    c.c50_db = 10.0 * std::log10(early / late);
  }
  return c;
}

AcousticParams analyze(const ImpulseResponse &rir) {
  const auto edc = energy_decay_curve(rir);
  const auto rt = rt60(edc);
  const auto cl = clarity50(rir);
  AcousticParams p;
  p.rt60 = rt.seconds;
  p.estimation_method = rt.method;
  p.t20 = rt.t20;
  p.t30 = rt.t30;
  p.dynamic_range_db = rt.dynamic_range_db;
  p.edt = edt(edc);
  p.c50 = cl.c50_db;
  p.d50 = cl.d50;
  p.onset_index = edc.onset_index;
  p.tail_truncated = edc.tail_truncated;
  return p;
}

nlohmann::json to_json(const AcousticParams &p) {
  nlohmann::json j;
  j["rt60"] = p.rt60;
  j["edt"] = p.edt;
  j["c50"] = p.c50 ? nlohmann::json(*p.c50) : nlohmann::json(nullptr);
  j["c50_infinite"] = !p.c50.has_value();
  j["d50"] = p.d50;
  j["estimation_method"] = to_string(p.estimation_method);
  j["dynamic_range_db"] = p.dynamic_range_db;
  j["t20"] = p.t20;
  j["t30"] = p.t30 ? nlohmann::json(*p.t30) : nlohmann::json(nullptr);
  j["onset_index"] = p.onset_index;
  j["tail_truncated"] = p.tail_truncated;
  return j;
}

double rt60_percent_error(double estimated, double ground_truth) {
  if (!(ground_truth > 0.0)) throw PreconditionError("ground-truth RT60 must be positive");
  return 100.0 * (estimated - ground_truth) / ground_truth;
}

double mean(std::span<const double> v) {
  if (v.empty()) throw PreconditionError("mean of empty sequence");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) throw PreconditionError("median of empty sequence");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ErrorReport aggregate_errors(std::vector<double> errors) {
  if (errors.empty()) throw PreconditionError("no errors to aggregate");
  ErrorReport r;
  r.n = errors.size();
  r.mean_error_pct = mean(errors);
  r.median_error_pct = median(errors);
  r.per_sample_errors = std::move(errors);
  return r;
}

}  // namespace rirbench::acoustics
