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
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "liqa/model.hpp"
#include "liqa/rng.hpp"

namespace liqa {

/// Random instance family. Rates, budgets and curve heights default to
/// log-uniform draws over [0.01, 100].
struct GeneratorSpec {
  enum class Kind { linear, pwl, mixed };

  int n = 2;
  Kind kind = Kind::linear;
  Regime regime = Regime::public_budget;
  int pwl_breakpoints = 4;  // interior breakpoints per pwl curve
  double value_lo = 0.01, value_hi = 100.0;
  double budget_lo = 0.01, budget_hi = 100.0;

  /// When > 0, pwl breakpoints are snapped to multiples of 1/align so the
  /// welfare DP runs on an exactly aligned grid.
  int align = 0;

  /// When true, pwl budgets are set to the curve value at a random
  /// breakpoint (cap kink on the grid) or above v(1) (cap inactive).
  bool budget_at_breakpoint = false;
};

namespace detail {

inline ValuationCurve random_pwl_curve(const GeneratorSpec& spec, std::mt19937_64& g) {
  const int k = std::max(0, spec.pwl_breakpoints);
  std::vector<double> xs;
  if (spec.align > 0) {
    const int d = spec.align;
    const int interior = std::min(k, d - 1);
    std::set<int> picked;
    while (static_cast<int>(picked.size()) < interior)
      picked.insert(1 + static_cast<int>(uniform_below(g, static_cast<std::uint64_t>(d - 1))));
    for (int j : picked) xs.push_back(static_cast<double>(j) / static_cast<double>(d));
  } else {
    std::set<double> picked;
    while (static_cast<int>(picked.size()) < k) {
      double x = uniform01(g);
      if (x > 0.0 && x < 1.0) picked.insert(x);
    }
    xs.assign(picked.begin(), picked.end());
  }

  const double total = log_uniform(g, spec.value_lo, spec.value_hi);
  std::vector<double> weights(xs.size() + 1);
  double sum = 0.0;
  for (auto& w : weights) {
    w = uniform01(g);
    sum += w;
  }
  if (sum == 0.0) {
    weights.back() = 1.0;
    sum = 1.0;
  }

  std::vector<CurvePoint> pts;
  pts.push_back({0.0, 0.0});
  double cum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cum += weights[i];
    pts.push_back({xs[i], total * (cum / sum)});
  }
  pts.push_back({1.0, total});
  return ValuationCurve::make_pwl(std::move(pts));
}

}  // namespace detail

/// Deterministic per seed: the same (spec, seed) pair always yields the
/// same instance.
inline Instance generate_instance(const GeneratorSpec& spec, std::uint64_t seed) {
  if (spec.n < 1) throw std::invalid_argument("generator needs n >= 1");
  if (spec.value_lo <= 0.0 || spec.value_hi < spec.value_lo || spec.budget_lo <= 0.0 ||
      spec.budget_hi < spec.budget_lo)
    throw std::invalid_argument("generator ranges must be positive and ordered");
  if (spec.kind != GeneratorSpec::Kind::linear && spec.regime == Regime::public_budget)
    throw std::invalid_argument("public-budget instances must be all-linear");

  std::mt19937_64 g(seed);
  Instance inst;
  inst.regime = spec.regime;
  for (int i = 0; i < spec.n; ++i) {
    bool linear = spec.kind == GeneratorSpec::Kind::linear ||
                  (spec.kind == GeneratorSpec::Kind::mixed && detail::coin_flip(g));
    Agent a;
    if (linear) {
      a.valuation = ValuationCurve::make_linear(detail::log_uniform(g, spec.value_lo, spec.value_hi));
      a.budget = detail::log_uniform(g, spec.budget_lo, spec.budget_hi);
    } else {
      a.valuation = detail::random_pwl_curve(spec, g);
      if (spec.budget_at_breakpoint) {
        const auto& pts = a.valuation.points;
        if (detail::uniform01(g) < 0.25) {
          a.budget = 2.0 * pts.back().v;  // cap never binds
        } else {
          const std::size_t pick =
              1 + detail::uniform_below(g, static_cast<std::uint64_t>(pts.size() - 1));
          a.budget = pts[pick].v;
        }
      } else {
        a.budget = detail::log_uniform(g, spec.budget_lo, spec.budget_hi);
      }
    }
    inst.agents.push_back(std::move(a));
  }
  validate_instance(inst);
  return inst;
}

}  // namespace liqa
