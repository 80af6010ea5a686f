// src/speech/wilcoxon.cpp

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
#include <cmath>
#include <numeric>

#include "rirbench/errors.hpp"
#include "rirbench/speech.hpp"

namespace rirbench::speech {

namespace {

struct Ranked {
  std::vector<double> d;      // differences entering the ranking
  std::vector<double> ranks;  // average ranks of |d|
  double tie_term = 0.0;      // sum of t^3 - t over nonzero tie groups
  std::size_t n_zero = 0;
  std::size_t count = 0;      // ranked entries
  double r_plus = 0.0, r_minus = 0.0;
};

Ranked rank_differences(std::span<const double> x, std::span<const double> y, ZeroMethod method) {
  if (x.size() != y.size())
    throw PreconditionError("paired samples differ in length: " + std::to_string(x.size()) +
                            " vs " + std::to_string(y.size()));
  if (x.size() < kWilcoxonMinPairs)
    throw PreconditionError("signed-rank test needs at least " +
                            std::to_string(kWilcoxonMinPairs) + " pairs, got " +
                            std::to_string(x.size()));
  Ranked r;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    if (!std::isfinite(d)) throw PreconditionError("non-finite paired value");
    if (d == 0.0) {
      ++r.n_zero;
      if (method == ZeroMethod::kWilcoxDropZeros) continue;
    }
    r.d.push_back(d);
  }
  r.count = r.d.size();
  std::vector<std::size_t> order(r.count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(r.d[a]) < std::abs(r.d[b]); });
  r.ranks.assign(r.count, 0.0);
  for (std::size_t i = 0; i < r.count;) {
    std::size_t j = i;
    while (j + 1 < r.count && std::abs(r.d[order[j + 1]]) == std::abs(r.d[order[i]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r.ranks[order[k]] = avg;
    const double t = static_cast<double>(j - i + 1);
    if (r.d[order[i]] != 0.0) r.tie_term += t * t * t - t;
    i = j + 1;
  }
  for (std::size_t i = 0; i < r.count; ++i) {
    if (r.d[i] > 0) r.r_plus += r.ranks[i];
    if (r.d[i] < 0) r.r_minus += r.ranks[i];
  }
  return r;
}

double normal_p(const Ranked &r, ZeroMethod method, double *z_out) {
  const double c = static_cast<double>(r.count);
  double mn = c * (c + 1.0) * 0.25;
  double se = c * (c + 1.0) * (2.0 * c + 1.0);
  if (method == ZeroMethod::kPratt) {
    const double z0 = static_cast<double>(r.n_zero);
    mn -= z0 * (z0 + 1.0) * 0.25;
    se -= z0 * (z0 + 1.0) * (2.0 * z0 + 1.0);
  }
  se = std::sqrt((se - r.tie_term / 2.0) / 24.0);
  double z = (r.r_plus - mn) / se;
  if (z > 0) z -= 0.5 / se;
  else if (z < 0) z += 0.5 / se;
  *z_out = -std::abs(z);
  return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

// Sign-flip distribution of W+ over the nonzero ranks. Average ranks are
// multiples of 1/2, so the walk runs on doubled ranks.
double exact_p(const Ranked &r) {
  std::vector<long> doubled;
  for (std::size_t i = 0; i < r.count; ++i)
    if (r.d[i] != 0.0) doubled.push_back(std::lround(2.0 * r.ranks[i]));
  const long total = std::accumulate(doubled.begin(), doubled.end(), 0L);
  std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
  ways[0] = 1.0;
  for (long v : doubled)
    for (long s = total; s >= v; --s) ways[s] += ways[s - v];
  const long observed = std::lround(2.0 * r.r_plus);
  const double all = std::ldexp(1.0, static_cast<int>(doubled.size()));
  double le = 0.0, ge = 0.0;
  for (long s = 0; s <= total; ++s) {
    if (s <= observed) le += ways[s];
    if (s >= observed) ge += ways[s];
  }
  return std::min(1.0, 2.0 * std::min(le, ge) / all);
}

PairedStats run(std::span<const double> x, std::span<const double> y, ZeroMethod method,
                bool allow_exact) {
  const Ranked r = rank_differences(x, y, method);
  PairedStats s;
  s.n = x.size();
  s.n_zero = r.n_zero;
  s.method = method;
  s.statistic = std::min(r.r_plus, r.r_minus);
  const std::size_t nonzero = x.size() - r.n_zero;
  if (nonzero == 0) {
    if (method == ZeroMethod::kWilcoxDropZeros) throw PreconditionError("no nonzero pairs");
    s.p_value = 1.0;
    s.exact = true;
    return s;
  }
  if (allow_exact && nonzero <= kWilcoxonExactMax) {
    s.exact = true;
    s.p_value = exact_p(r);
  } else {
    double z = 0.0;
    s.p_value = normal_p(r, method, &z);
    s.z = z;
  }
  return s;
}

}  // namespace

std::string to_string(ZeroMethod m) {
  return m == ZeroMethod::kPratt ? "pratt" : "wilcox_drop_zeros";
}

nlohmann::json to_json(const PairedStats &s) {
  return {{"n", s.n},
          {"n_zero", s.n_zero},
          {"statistic", s.statistic},
          {"p_value", s.p_value},
          {"method", to_string(s.method)},
          {"exact", s.exact},
          {"z", s.z ? nlohmann::json(*s.z) : nlohmann::json()},
          {"alternative", "two-sided"}};
}

PairedStats wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                 ZeroMethod method) {
  return run(x, y, method, true);
}

PairedStats wilcoxon_signed_rank_approx(std::span<const double> x, std::span<const double> y,
                                        ZeroMethod method) {
  return run(x, y, method, false);
}

}  // namespace rirbench::speech
