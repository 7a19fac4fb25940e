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
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace liqa {

/// Slack allowed on the total-supply invariant (sum of allocations <= 1).
/// Everything else in the library compares exactly: branch decisions inside
/// the mechanisms must be deterministic, so no epsilon fuzz is applied there.
inline constexpr double kSupplyEps = 1e-12;

enum class CurveKind { linear, pwl };

struct CurvePoint {
  double x = 0.0;  // fraction of the good, in [0, 1]
  double v = 0.0;  // value at that fraction
};

/// A monotone non-decreasing valuation for the unit of divisible good.
/// Either a linear per-unit rate v(x) = rate * x, or a piecewise-linear
/// curve through breakpoints starting at (0, 0) and ending at x = 1.
struct ValuationCurve {
  CurveKind kind = CurveKind::linear;
  double rate = 0.0;                // linear only
  std::vector<CurvePoint> points;   // pwl only

  static ValuationCurve make_linear(double rate);
  static ValuationCurve make_pwl(std::vector<CurvePoint> pts);
};

inline void validate_curve(const ValuationCurve& c) {
  if (c.kind == CurveKind::linear) {
    if (!std::isfinite(c.rate) || c.rate < 0.0)
      throw std::invalid_argument("linear valuation rate must be finite and >= 0");
    return;
  }
  const auto& p = c.points;
  if (p.size() < 2) throw std::invalid_argument("pwl valuation needs at least two points");
  if (p.front().x != 0.0 || p.front().v != 0.0)
    throw std::invalid_argument("pwl valuation must start at (0, 0)");
  if (p.back().x != 1.0) throw std::invalid_argument("pwl valuation must end at x = 1");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i].x) || !std::isfinite(p[i].v) || p[i].v < 0.0)
      throw std::invalid_argument("pwl breakpoint values must be finite and >= 0");
    if (i > 0) {
      if (p[i].x <= p[i - 1].x)
        throw std::invalid_argument("pwl breakpoints must be strictly increasing in x");
      if (p[i].v < p[i - 1].v)
        throw std::invalid_argument("pwl values must be non-decreasing");
    }
  }
}

inline ValuationCurve ValuationCurve::make_linear(double rate) {
  ValuationCurve c;
  c.kind = CurveKind::linear;
  c.rate = rate;
  validate_curve(c);
  return c;
}

inline ValuationCurve ValuationCurve::make_pwl(std::vector<CurvePoint> pts) {
  ValuationCurve c;
  c.kind = CurveKind::pwl;
  c.points = std::move(pts);
  validate_curve(c);
  return c;
}

/// Evaluates v(x) for x in [0, 1]. Breakpoints are hit exactly (no
/// interpolation residue at the table entries).
inline double evaluate_valuation(const ValuationCurve& c, double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("valuation argument must lie in [0, 1]");
  if (c.kind == CurveKind::linear) return c.rate * x;
  const auto& p = c.points;
  auto it = std::lower_bound(p.begin(), p.end(), x,
                             [](const CurvePoint& a, double b) { return a.x < b; });
  if (it != p.end() && it->x == x) return it->v;
  const CurvePoint& hi = *it;        // it > begin: x > 0 here since p[0].x == 0
  const CurvePoint& lo = *(it - 1);
  return lo.v + (x - lo.x) * (hi.v - lo.v) / (hi.x - lo.x);
}

/// Returns a copy of the curve with all values multiplied by s >= 0.
/// Used by the deviation audits to synthesize value misreports.
inline ValuationCurve scale_curve(const ValuationCurve& c, double s) {
  if (!std::isfinite(s) || s < 0.0) throw std::invalid_argument("curve scale must be >= 0");
  ValuationCurve out = c;
  if (out.kind == CurveKind::linear) {
    out.rate *= s;
  } else {
    for (auto& pt : out.points) pt.v *= s;
  }
  return out;
}

struct Agent {
  double budget = 0.0;
  ValuationCurve valuation;
};

inline void validate_agent(const Agent& a) {
  if (!std::isfinite(a.budget) || a.budget < 0.0)
    throw std::invalid_argument("agent budget must be finite and >= 0");
  validate_curve(a.valuation);
}

/// min(v_i(x), B_i): the budget-capped value an agent derives from x.
inline double liquid_value(const Agent& a, double x) {
  return std::min(evaluate_valuation(a.valuation, x), a.budget);
}

enum class Regime { public_budget, private_budget };

struct Instance {
  std::vector<Agent> agents;
  Regime regime = Regime::public_budget;

  std::size_t size() const { return agents.size(); }
};

inline void validate_instance(const Instance& inst) {
  if (inst.agents.empty()) throw std::invalid_argument("instance needs at least one agent");
  for (const auto& a : inst.agents) validate_agent(a);
  if (inst.regime == Regime::public_budget) {
    for (const auto& a : inst.agents)
      if (a.valuation.kind != CurveKind::linear)
        throw std::invalid_argument("public-budget regime requires linear valuations");
  }
}

inline bool all_linear(const Instance& inst) {
  return std::all_of(inst.agents.begin(), inst.agents.end(), [](const Agent& a) {
    return a.valuation.kind == CurveKind::linear;
  });
}

/// Per-agent allocation fractions and payments of one mechanism run.
struct Outcome {
  std::vector<double> allocations;
  std::vector<double> payments;

  static Outcome zeros(std::size_t n) {
    Outcome o;
    o.allocations.assign(n, 0.0);
    o.payments.assign(n, 0.0);
    return o;
  }
};

struct OutcomeCheck {
  bool nonneg_ok = true;   // x_i >= 0 and p_i >= 0
  bool supply_ok = true;   // sum x_i <= 1 + kSupplyEps
  bool budget_ok = true;   // p_i <= B_i, exact comparison

  bool ok() const { return nonneg_ok && supply_ok && budget_ok; }
};

inline OutcomeCheck check_outcome(const Instance& inst, const Outcome& out) {
  if (out.allocations.size() != inst.size() || out.payments.size() != inst.size())
    throw std::invalid_argument("outcome dimensions do not match instance");
  OutcomeCheck c;
  double total = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (out.allocations[i] < 0.0 || out.payments[i] < 0.0) c.nonneg_ok = false;
    if (out.payments[i] > inst.agents[i].budget) c.budget_ok = false;
    total += out.allocations[i];
  }
  if (total > 1.0 + kSupplyEps) c.supply_ok = false;
  return c;
}

}  // namespace liqa
