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
#include <limits>
#include <stdexcept>
#include <vector>

#include "liqa/liquid_welfare.hpp"
#include "liqa/model.hpp"

namespace liqa {

/// v_bar: the budget-capped value of the whole unit, min(v(1), B).
inline double v_bar(const Agent& a) {
  return std::min(evaluate_valuation(a.valuation, 1.0), a.budget);
}

/// Demand of an agent at a uniform unit price: the largest maximizer of
/// the capped surplus min(v(x), B) - p x over x in [0, 1].
struct Demand {
  double p = 0.0;
  double x_star = 0.0;
  double surplus = 0.0;  // capped value at x_star minus p * x_star
};

namespace detail {

/// Candidate maximizers of a piecewise-linear objective on [0, hi]:
/// the endpoints plus every interior kink of the (optionally capped)
/// curve. Exactness of the enumeration follows from piecewise linearity.
inline std::vector<double> demand_candidates(const Agent& a, double hi, bool capped) {
  std::vector<double> xs;
  xs.push_back(0.0);
  if (a.valuation.kind == CurveKind::pwl) {
    for (std::size_t i = 1; i + 1 < a.valuation.points.size(); ++i) {
      double x = a.valuation.points[i].x;
      if (x > 0.0 && x < hi) xs.push_back(x);
    }
  }
  if (capped) {
    for (double k : capped_kinks(a))
      if (k > 0.0 && k < hi) xs.push_back(k);
  }
  if (hi > 0.0) xs.push_back(hi);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

/// Largest maximizer of obj over the candidate set (ascending scan with
/// >= keeps the rightmost of exactly tied values).
template <typename Obj>
inline double largest_argmax(const std::vector<double>& xs, Obj obj) {
  double best_x = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (double x : xs) {
    double g = obj(x);
    if (g >= best) {
      best = g;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace detail

inline Demand demand_at(const Agent& a, double p) {
  if (!(p >= 0.0)) throw std::invalid_argument("price must be >= 0");
  auto xs = detail::demand_candidates(a, 1.0, /*capped=*/true);
  double x = detail::largest_argmax(xs, [&](double t) { return liquid_value(a, t) - p * t; });
  return Demand{p, x, liquid_value(a, x) - p * x};
}

/// Largest maximizer of the uncapped surplus v(x) - p x over
/// x <= min(hi, B / p); the budget cap is inactive when p = 0.
/// This is the take-it-or-leave-it step of the random sampling auction.
inline double constrained_demand(const Agent& a, double p, double hi) {
  if (!(p >= 0.0)) throw std::invalid_argument("price must be >= 0");
  double cap = std::min(hi, 1.0);
  if (p > 0.0) cap = std::min(cap, a.budget / p);
  cap = std::max(cap, 0.0);
  auto xs = detail::demand_candidates(a, cap, /*capped=*/false);
  return detail::largest_argmax(
      xs, [&](double t) { return evaluate_valuation(a.valuation, t) - p * t; });
}

/// W(p): aggregate capped value when every agent takes its demand at the
/// uniform price p.
inline double w_of_p(const Instance& inst, double p) {
  double w = 0.0;
  for (const auto& a : inst.agents) w += liquid_value(a, demand_at(a, p).x_star);
  return w;
}

}  // namespace liqa
