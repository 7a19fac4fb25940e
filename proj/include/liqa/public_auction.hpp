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
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "liqa/liquid_welfare.hpp"
#include "liqa/model.hpp"

namespace liqa {

/// Golden ratio, the positive root of t^2 = t + 1. The public auction's
/// price levels and its approximation factor are built from it.
inline constexpr double kGoldenRatio = 1.6180339887498948482045868343656381;

enum class AllocationCase { case_i, case_ii };

/// The regime the public auction lands in for a given bid profile:
/// the winner-prefix size k (0 when no prefix qualifies), which of the
/// two pricing cases applies, the uniform price level p0, and the
/// rate-descending agent order used throughout.
struct AllocationRegime {
  int k = 0;
  AllocationCase alloc_case = AllocationCase::case_i;
  double p0 = 0.0;
  std::vector<int> sorted_order;  // original agent indices, rate desc, ties by index
};

struct PublicAllocation {
  std::vector<double> allocations;  // original agent index order
  AllocationRegime regime;
};

namespace detail {

struct SortedRegime {
  int k = 0;
  bool case_i = true;
  double p0 = 0.0;
  double prefix_budget = 0.0;  // sum of the first k sorted budgets
};

/// Regime of a bid profile already sorted by rate descending. The
/// k-condition (prefix budgets / phi <= k-th rate) is prefix-closed, so a
/// forward scan that stops at the first failure finds the maximum k.
inline SortedRegime regime_of_sorted(const std::vector<double>& rates,
                                     const std::vector<double>& budgets) {
  const int n = static_cast<int>(rates.size());
  SortedRegime rg;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += budgets[i];
    if (sum / kGoldenRatio <= rates[i]) {
      rg.k = i + 1;
      rg.prefix_budget = sum;
    } else {
      break;
    }
  }
  const double v_next = rg.k < n ? rates[rg.k] : 0.0;
  rg.case_i = rg.prefix_budget / kGoldenRatio >= v_next;
  rg.p0 = rg.case_i ? rg.prefix_budget : kGoldenRatio * v_next;
  return rg;
}

/// Allocation of the agent at sorted position pos. Winners in the prefix
/// get B/p0 * min(v/p0, 1); in case II the (k+1)-th agent absorbs
/// 1/phi - S_k / (phi^2 v_{k+1}); everyone else gets nothing.
inline double sorted_allocation(const SortedRegime& rg, const std::vector<double>& rates,
                                const std::vector<double>& budgets, int pos) {
  if (pos < rg.k) {
    if (rg.p0 <= 0.0) return 0.0;
    return budgets[pos] / rg.p0 * std::min(rates[pos] / rg.p0, 1.0);
  }
  if (!rg.case_i && pos == rg.k) {
    const double v_next = rates[pos];
    assert(v_next > 0.0);  // case II forces prefix_budget / phi < v_{k+1}
    return 1.0 / kGoldenRatio - rg.prefix_budget / (kGoldenRatio * kGoldenRatio * v_next);
  }
  return 0.0;
}

}  // namespace detail

/// Runs the allocation rule of the golden-ratio public-budget auction.
/// Linear valuations only; the missing (n+1)-th rate is treated as 0.
inline PublicAllocation allocate_public(const Instance& inst) {
  validate_instance(inst);
  if (inst.regime != Regime::public_budget)
    throw std::invalid_argument("allocate_public requires the public-budget regime");

  const auto order = detail::rate_sorted_indices(inst.agents);
  const int n = static_cast<int>(inst.size());
  std::vector<double> rates(n), budgets(n);
  for (int pos = 0; pos < n; ++pos) {
    rates[pos] = inst.agents[order[pos]].valuation.rate;
    budgets[pos] = inst.agents[order[pos]].budget;
  }

  const auto rg = detail::regime_of_sorted(rates, budgets);
  PublicAllocation out;
  out.allocations.assign(n, 0.0);
  for (int pos = 0; pos < n; ++pos)
    out.allocations[order[pos]] = detail::sorted_allocation(rg, rates, budgets, pos);
  out.regime.k = rg.k;
  out.regime.alloc_case = rg.case_i ? AllocationCase::case_i : AllocationCase::case_ii;
  out.regime.p0 = rg.p0;
  out.regime.sorted_order = order;
  return out;
}

/// Evaluates one agent's allocation as a function of her reported rate,
/// with everyone else's report fixed. Reuses internal buffers, so one
/// instance of this class must not be probed from two threads at once.
class PublicBidCurve {
 public:
  struct Probe {
    double x = 0.0;
    int rank = 0;  // 0-based position of the agent in the sorted order
    int k = 0;
    bool case_i = true;
    double p0 = 0.0;
    double prefix_budget = 0.0;
  };

  PublicBidCurve(const Instance& inst, int agent) : own_index_(agent) {
    validate_instance(inst);
    if (inst.regime != Regime::public_budget)
      throw std::invalid_argument("PublicBidCurve requires the public-budget regime");
    if (agent < 0 || agent >= static_cast<int>(inst.size()))
      throw std::out_of_range("agent index out of range");
    own_budget_ = inst.agents[agent].budget;

    std::vector<int> order = detail::rate_sorted_indices(inst.agents);
    for (int idx : order) {
      if (idx == agent) continue;
      other_rates_.push_back(inst.agents[idx].valuation.rate);
      other_budgets_.push_back(inst.agents[idx].budget);
      other_indices_.push_back(idx);
    }
    rates_buf_.resize(inst.size());
    budgets_buf_.resize(inst.size());
  }

  Probe probe(double report) const {
    const int m = static_cast<int>(other_rates_.size());
    int t = 0;  // agents ranked above the probed agent
    while (t < m && (other_rates_[t] > report ||
                     (other_rates_[t] == report && other_indices_[t] < own_index_)))
      ++t;
    for (int j = 0; j < t; ++j) {
      rates_buf_[j] = other_rates_[j];
      budgets_buf_[j] = other_budgets_[j];
    }
    rates_buf_[t] = report;
    budgets_buf_[t] = own_budget_;
    for (int j = t; j < m; ++j) {
      rates_buf_[j + 1] = other_rates_[j];
      budgets_buf_[j + 1] = other_budgets_[j];
    }

    const auto rg = detail::regime_of_sorted(rates_buf_, budgets_buf_);
    Probe p;
    p.x = detail::sorted_allocation(rg, rates_buf_, budgets_buf_, t);
    p.rank = t;
    p.k = rg.k;
    p.case_i = rg.case_i;
    p.p0 = rg.p0;
    p.prefix_budget = rg.prefix_budget;
    return p;
  }

  double allocation_at(double report) const { return probe(report).x; }

  double own_budget() const { return own_budget_; }

 private:
  double own_budget_ = 0.0;
  int own_index_ = 0;
  std::vector<double> other_rates_;
  std::vector<double> other_budgets_;
  std::vector<int> other_indices_;
  mutable std::vector<double> rates_buf_, budgets_buf_;
};

/// One closed-form span of an agent's allocation curve u -> x_i(u, v_-i).
/// Only three shapes occur: a constant, a line through the origin, and
/// a - b/u for the case-II absorber.
struct RegimePiece {
  enum class Form { constant, linear_in_report, hyperbolic };

  double lo = 0.0, hi = 0.0;  // report interval (lo, hi]
  Form form = Form::constant;
  double a = 0.0;
  double b = 0.0;

  double value_at(double u) const {
    switch (form) {
      case Form::constant: return a;
      case Form::linear_in_report: return a * u;
      case Form::hyperbolic: return a - b / u;
    }
    return 0.0;
  }

  double integral() const { return integral_to(hi); }

  /// Integral of the closed form over (lo, min(u, hi)).
  double integral_to(double u) const {
    const double h = std::min(u, hi);
    if (h <= lo) return 0.0;
    switch (form) {
      case Form::constant: return a * (h - lo);
      case Form::linear_in_report: return a * (h * h - lo * lo) / 2.0;
      case Form::hyperbolic: return a * (h - lo) - b * std::log(h / lo);
    }
    return 0.0;
  }
};

namespace detail {

struct PieceLabel {
  int rank = 0;
  int k = 0;
  bool case_i = true;
  bool clamped = false;  // report at or above p0 (prefix winners only)
  bool absorber = false;
};

inline PieceLabel label_of(const PublicBidCurve::Probe& p, double u) {
  PieceLabel l;
  l.rank = p.rank;
  l.k = p.k;
  l.case_i = p.case_i;
  l.absorber = !p.case_i && p.rank == p.k;
  l.clamped = p.rank < p.k && u >= p.p0;
  return l;
}

inline bool operator==(const PieceLabel& a, const PieceLabel& b) {
  return a.rank == b.rank && a.k == b.k && a.case_i == b.case_i && a.clamped == b.clamped &&
         a.absorber == b.absorber;
}

inline RegimePiece piece_from_label(const PieceLabel& l, const PublicBidCurve::Probe& p,
                                    double budget, double lo, double hi) {
  RegimePiece piece;
  piece.lo = lo;
  piece.hi = hi;
  if (l.absorber) {
    if (p.prefix_budget == 0.0) {
      piece.form = RegimePiece::Form::constant;
      piece.a = 1.0 / kGoldenRatio;
    } else {
      piece.form = RegimePiece::Form::hyperbolic;
      piece.a = 1.0 / kGoldenRatio;
      piece.b = p.prefix_budget / (kGoldenRatio * kGoldenRatio);
    }
    return piece;
  }
  if (l.rank < l.k && p.p0 > 0.0) {
    if (l.clamped) {
      piece.form = RegimePiece::Form::constant;
      piece.a = budget / p.p0;
    } else {
      piece.form = RegimePiece::Form::linear_in_report;
      piece.a = budget / (p.p0 * p.p0);
    }
    return piece;
  }
  piece.form = RegimePiece::Form::constant;
  piece.a = 0.0;
  return piece;
}

}  // namespace detail

/// Piecewise closed-form description of u -> x_i(u, v_-i) on (0, upper].
/// Breakpoint discovery is conservative: a superset of candidate
/// boundaries is generated from the other agents' rates, the possible
/// price levels, and their phi-scalings; every interval is then verified
/// by sampling the regime and bisected on any mismatch.
inline std::vector<RegimePiece> myerson_pieces(const Instance& inst, int agent,
                                               double upper = -1.0) {
  validate_instance(inst);
  if (agent < 0 || agent >= static_cast<int>(inst.size()))
    throw std::out_of_range("agent index out of range");
  const double v_i = inst.agents[agent].valuation.rate;
  const double hi_end = upper > 0.0 ? upper : v_i;
  if (hi_end <= 0.0) return {};

  const PublicBidCurve curve(inst, agent);
  const double own_budget = inst.agents[agent].budget;

  // Candidate breakpoints: rank crossings at other rates, case switches at
  // phi * rate, and every achievable price level S (budget prefix sums,
  // with and without this agent) together with S / phi.
  std::vector<double> cands;
  std::vector<double> prefix_sums;
  {
    std::vector<int> order = detail::rate_sorted_indices(inst.agents);
    double run = 0.0;
    prefix_sums.push_back(0.0);
    for (int idx : order) {
      if (idx == agent) continue;
      run += inst.agents[idx].budget;
      prefix_sums.push_back(run);
    }
    for (int idx : order) {
      if (idx == agent) continue;
      const double r = inst.agents[idx].valuation.rate;
      cands.push_back(r);
      cands.push_back(kGoldenRatio * r);
    }
    for (double s : prefix_sums) {
      for (double cand : {s, s + own_budget}) {
        cands.push_back(cand);
        cands.push_back(cand / kGoldenRatio);
      }
    }
  }
  std::vector<double> pts;
  pts.push_back(0.0);
  for (double c : cands)
    if (c > 0.0 && c < hi_end) pts.push_back(c);
  pts.push_back(hi_end);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  const double min_width = 1e-13 * std::max(1.0, hi_end);
  std::vector<RegimePiece> pieces;
  std::vector<std::pair<double, double>> stack;
  for (std::size_t i = pts.size() - 1; i > 0; --i) stack.push_back({pts[i - 1], pts[i]});

  while (!stack.empty()) {
    auto [lo, hi] = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (lo + hi);
    const auto pr = curve.probe(mid);
    const auto label = detail::label_of(pr, mid);
    RegimePiece piece = detail::piece_from_label(label, pr, own_budget, lo, hi);

    bool ok = true;
    for (int s = 0; s < 17 && ok; ++s) {
      const double u = lo + (hi - lo) * (s + 0.5) / 17.0;
      const auto q = curve.probe(u);
      if (!(detail::label_of(q, u) == label)) ok = false;
      const double err = std::abs(piece.value_at(u) - q.x);
      if (err > 1e-12 * std::max(1.0, std::abs(q.x))) ok = false;
    }
    if (!ok && hi - lo > min_width) {
      stack.push_back({mid, hi});
      stack.push_back({lo, mid});
      continue;
    }
    pieces.push_back(piece);
  }
  std::sort(pieces.begin(), pieces.end(),
            [](const RegimePiece& x, const RegimePiece& y) { return x.lo < y.lo; });
  return pieces;
}

/// Payment making the monotone allocation truthful: report times own
/// allocation minus the integral of the allocation curve below the
/// report, evaluated in closed form piece by piece.
inline double myerson_payment_from_pieces(const std::vector<RegimePiece>& pieces, double report,
                                          double allocation) {
  double integral = 0.0;
  for (const auto& p : pieces) {
    if (p.lo >= report) break;
    integral += p.integral_to(report);
  }
  return std::max(0.0, report * allocation - integral);
}

/// Full public auction run: golden-ratio allocation plus exact payments.
inline Outcome pay_public(const Instance& inst) {
  const auto alloc = allocate_public(inst);
  Outcome out;
  out.allocations = alloc.allocations;
  out.payments.assign(inst.size(), 0.0);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (out.allocations[i] == 0.0) continue;  // integral of a zero curve
    const auto pieces = myerson_pieces(inst, static_cast<int>(i));
    out.payments[i] = myerson_payment_from_pieces(pieces, inst.agents[i].valuation.rate,
                                                  out.allocations[i]);
  }
  return out;
}

namespace detail {

template <typename F>
inline double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                                   double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
inline double adaptive_simpson(const F& f, double a, double b, double tol, int depth = 55) {
  if (b <= a) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

}  // namespace detail

/// Independent numeric route to the Myerson payment: adaptive Simpson
/// quadrature of the sampled allocation curve. Shares no code with the
/// piece enumeration, so it guards against breakpoint discovery bugs.
inline double payment_quadrature(const Instance& inst, int agent, double tol = 1e-10) {
  validate_instance(inst);
  const double v_i = inst.agents[agent].valuation.rate;
  if (v_i <= 0.0) return 0.0;
  const PublicBidCurve curve(inst, agent);
  const double x_own = curve.allocation_at(v_i);
  if (x_own == 0.0) return 0.0;
  const double integral = detail::adaptive_simpson(
      [&](double u) { return curve.allocation_at(u); }, 0.0, v_i, tol);
  return std::max(0.0, v_i * x_own - integral);
}

}  // namespace liqa
