// Copyright 2026 The liqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "liqa/model.hpp"

namespace liqa {

/// Liquid welfare of an outcome: sum of budget-capped values at the
/// allocated fractions.
inline double welfare(const Instance& inst, const Outcome& out) {
  if (out.allocations.size() != inst.size())
    throw std::invalid_argument("outcome dimensions do not match instance");
  double w = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i)
    w += liquid_value(inst.agents[i], out.allocations[i]);
  return w;
}

inline double revenue(const Outcome& out) {
  return std::accumulate(out.payments.begin(), out.payments.end(), 0.0);
}

struct OptResult {
  enum class Method { greedy_linear, dp_grid };

  double value = 0.0;
  std::vector<double> allocation;  // original agent index order
  Method method = Method::greedy_linear;
  long grid_resolution = 0;        // dp_grid only
  bool grid_exact = true;          // dp_grid: all capped-curve kinks lie on the grid
};

namespace detail {

/// Agent indices sorted by linear rate descending, ties by original index.
/// The same ordering rule is used by the public auction and the greedy.
inline std::vector<int> rate_sorted_indices(const std::vector<Agent>& agents) {
  std::vector<int> order(agents.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (agents[a].valuation.rate != agents[b].valuation.rate)
      return agents[a].valuation.rate > agents[b].valuation.rate;
    return a < b;
  });
  return order;
}

/// Interior kinks (in (0,1)) of the capped curve min(v(x), B):
/// pwl breakpoints plus the point where v crosses the budget cap.
inline std::vector<double> capped_kinks(const Agent& a) {
  std::vector<double> ks;
  const auto& c = a.valuation;
  if (c.kind == CurveKind::linear) {
    if (c.rate > 0.0 && a.budget < c.rate) {
      double xc = a.budget / c.rate;
      if (xc > 0.0 && xc < 1.0) ks.push_back(xc);
    }
    return ks;
  }
  for (std::size_t i = 1; i + 1 < c.points.size(); ++i) ks.push_back(c.points[i].x);
  if (c.points.back().v > a.budget) {
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      const auto& lo = c.points[i - 1];
      const auto& hi = c.points[i];
      if (lo.v < a.budget && a.budget <= hi.v) {
        double xc = lo.x + (a.budget - lo.v) * (hi.x - lo.x) / (hi.v - lo.v);
        if (xc > 0.0 && xc < 1.0) ks.push_back(xc);
        break;
      }
    }
  }
  return ks;
}

/// Best rational denominator q <= qmax with |x - p/q| <= tol, via the
/// continued-fraction expansion of x. Returns 0 when none fits.
inline long rational_denominator(double x, long qmax, double tol) {
  double a = x;
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;  // convergents p/q of x
  for (int it = 0; it < 64; ++it) {
    double fl = std::floor(a);
    if (fl > static_cast<double>(qmax)) break;
    long ai = static_cast<long>(fl);
    long p2 = ai * p1 + p0;
    long q2 = ai * q1 + q0;
    if (q2 > qmax || q2 <= 0) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) <= tol) return q1;
    double frac = a - fl;
    if (frac < 1e-15) break;
    a = 1.0 / frac;
  }
  return 0;
}

/// Smallest grid resolution >= m whose points contain every capped-curve
/// kink of the instance (up to 1e-12 placement). 0 when infeasible.
inline long aligned_resolution(const Instance& inst, long m, long cap = 16384) {
  long l = 1;
  for (const auto& a : inst.agents) {
    for (double k : capped_kinks(a)) {
      long q = rational_denominator(k, 4096, 1e-12);
      if (q == 0) return 0;
      long g = std::gcd(l, q);
      if (l / g > cap / q) return 0;  // lcm overflow past cap
      l = l / g * q;
    }
  }
  if (l > cap) return 0;
  long refined = l * ((m + l - 1) / l);
  if (refined <= cap) return refined;
  return (cap / l) * l;  // largest aligned resolution under the cap
}

}  // namespace detail

/// Exact optimal liquid welfare for all-linear instances: fill agents in
/// rate order, each up to the smaller of its budget exhaustion point and
/// the remaining supply. Zero-rate agents receive nothing.
inline OptResult opt_linear_greedy(const Instance& inst) {
  validate_instance(inst);
  if (!all_linear(inst)) throw std::invalid_argument("opt_linear_greedy requires linear valuations");

  const auto order = detail::rate_sorted_indices(inst.agents);
  OptResult r;
  r.method = OptResult::Method::greedy_linear;
  r.allocation.assign(inst.size(), 0.0);

  double remaining = 1.0;
  for (int idx : order) {
    const Agent& a = inst.agents[idx];
    if (a.valuation.rate <= 0.0) continue;
    double x = std::min(a.budget / a.valuation.rate, std::max(remaining, 0.0));
    r.allocation[idx] = x;
    remaining -= x;
  }
  for (std::size_t i = 0; i < inst.size(); ++i)
    r.value += liquid_value(inst.agents[i], r.allocation[i]);
  return r;
}

/// Grid dynamic program maximizing total liquid welfare subject to the
/// unit supply. The requested resolution is refined so that every kink of
/// every capped curve lands on the grid whenever a small common
/// denominator exists; otherwise the result is approximate and
/// grid_exact is false.
inline OptResult opt_dp(const Instance& inst, long m) {
  validate_instance(inst);
  if (m < 1) throw std::invalid_argument("grid resolution must be >= 1");
  if (m > 100000) throw std::invalid_argument("grid resolution above the supported range");

  const long aligned = detail::aligned_resolution(inst, m);
  const long res = aligned > 0 ? aligned : m;
  const std::size_t n = inst.size();
  const std::size_t w = static_cast<std::size_t>(res) + 1;

  // Per-agent capped values at the grid points.
  std::vector<double> values(w);
  std::vector<double> dp(w, 0.0), next(w, 0.0);
  std::vector<std::int32_t> choice(n * w, 0);

  for (std::size_t i = 0; i < n; ++i) {
    const Agent& a = inst.agents[i];
    for (std::size_t j = 0; j < w; ++j)
      values[j] = liquid_value(a, static_cast<double>(j) / static_cast<double>(res));
    for (std::size_t s = 0; s < w; ++s) {
      double best = dp[s];
      std::int32_t best_a = 0;
      for (std::size_t take = 1; take <= s; ++take) {
        double cand = dp[s - take] + values[take];
        if (cand > best) {
          best = cand;
          best_a = static_cast<std::int32_t>(take);
        }
      }
      next[s] = best;
      choice[i * w + s] = best_a;
    }
    std::swap(dp, next);
  }

  OptResult r;
  r.method = OptResult::Method::dp_grid;
  r.grid_resolution = res;
  r.grid_exact = aligned > 0;
  r.allocation.assign(n, 0.0);

  std::size_t s = w - 1;
  for (std::size_t i = n; i-- > 0;) {
    std::int32_t take = choice[i * w + s];
    r.allocation[i] = static_cast<double>(take) / static_cast<double>(res);
    s -= static_cast<std::size_t>(take);
  }
  for (std::size_t i = 0; i < n; ++i)
    r.value += liquid_value(inst.agents[i], r.allocation[i]);
  return r;
}

/// Prefix upper bound on the optimum for all-linear instances:
/// sum of the j highest-rate budgets plus the (j+1)-th rate times the
/// supply left after exhausting those budgets (which may be negative).
/// j is 1-based, 1 <= j <= n-1, over the rate-sorted order.
inline double opt_upper_bound(const Instance& inst, int j) {
  validate_instance(inst);
  if (!all_linear(inst)) throw std::invalid_argument("opt_upper_bound requires linear valuations");
  const int n = static_cast<int>(inst.size());
  if (j < 1 || j > n - 1) throw std::invalid_argument("prefix index out of range");

  const auto order = detail::rate_sorted_indices(inst.agents);
  double sum_budget = 0.0;
  double sum_ratio = 0.0;
  for (int t = 0; t < j; ++t) {
    const Agent& a = inst.agents[order[t]];
    if (a.valuation.rate == 0.0)
      throw std::domain_error("opt_upper_bound: zero rate inside the prefix");
    sum_budget += a.budget;
    sum_ratio += a.budget / a.valuation.rate;
  }
  const double v_next = inst.agents[order[j]].valuation.rate;
  if (v_next == 0.0) return sum_budget;
  return sum_budget + v_next * (1.0 - sum_ratio);
}

}  // namespace liqa
