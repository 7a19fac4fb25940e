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

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "liqa/model.hpp"
#include "liqa/private_auction.hpp"
#include "liqa/public_auction.hpp"
#include "liqa/rng.hpp"

namespace liqa {

/// Utility of an agent with true preferences (curve, budget) receiving
/// fraction x at payment p: value minus payment, or -infinity when the
/// payment exceeds the true budget.
inline double agent_utility(const Agent& true_agent, double x, double p) {
  if (p > true_agent.budget) return -std::numeric_limits<double>::infinity();
  return evaluate_valuation(true_agent.valuation, x) - p;
}

struct DeviationViolation {
  int agent = 0;
  double value_scale = 1.0;
  double budget_scale = 1.0;
  double truthful_utility = 0.0;
  double deviating_utility = 0.0;

  double gain() const { return deviating_utility - truthful_utility; }
};

struct AuditOptions {
  int grid = 200;            // multiplicative misreport grid points over (0, 3]
  int random_deviations = 32;
  double tol = 1e-9;         // utility-gain threshold for a violation
  std::uint64_t seed = 1;    // seeds the random perturbations
};

/// Outcome-invariant flags accumulated over every mechanism run an audit
/// performs (truthful and deviating runs alike).
struct AuditReport {
  std::vector<DeviationViolation> violations;
  bool supply_violation = false;
  bool budget_violation = false;
  bool nonneg_violation = false;
  int runs = 0;

  int total_violations() const {
    return static_cast<int>(violations.size()) + (supply_violation ? 1 : 0) +
           (budget_violation ? 1 : 0) + (nonneg_violation ? 1 : 0);
  }

  void absorb_check(const OutcomeCheck& c) {
    ++runs;
    supply_violation |= !c.supply_ok;
    budget_violation |= !c.budget_ok;
    nonneg_violation |= !c.nonneg_ok;
  }
};

/// Deviation audit of the public golden-ratio auction. Budgets are public
/// knowledge there, so misreports scale the reported rate only. The
/// allocation curve is swept once per agent and reused across the whole
/// misreport grid, with payments from the closed-form piece integrals.
inline AuditReport audit_public(const Instance& inst, const AuditOptions& opts = {}) {
  validate_instance(inst);
  AuditReport report;
  std::mt19937_64 g(opts.seed);

  const auto truthful = pay_public(inst);
  report.absorb_check(check_outcome(inst, truthful));

  for (int i = 0; i < static_cast<int>(inst.size()); ++i) {
    const Agent& agent = inst.agents[i];
    const double v_i = agent.valuation.rate;
    if (v_i <= 0.0) continue;

    const PublicBidCurve curve(inst, i);
    const auto pieces = myerson_pieces(inst, i, 3.0 * v_i);
    const auto utility_at = [&](double report_rate) {
      const double x = curve.allocation_at(report_rate);
      const double p = myerson_payment_from_pieces(pieces, report_rate, x);
      return agent_utility(agent, x, p);
    };

    const double truthful_utility = utility_at(v_i);
    const auto consider = [&](double report_rate, double scale) {
      const double u = utility_at(report_rate);
      if (u > truthful_utility + opts.tol)
        report.violations.push_back({i, scale, 1.0, truthful_utility, u});
    };
    for (int j = 1; j <= opts.grid; ++j) {
      const double scale = 3.0 * static_cast<double>(j) / static_cast<double>(opts.grid);
      consider(scale * v_i, scale);
    }
    for (int j = 0; j < opts.random_deviations; ++j) {
      const double scale = 3.0 * detail::uniform01(g);
      if (scale <= 0.0) continue;
      consider(scale * v_i, scale);
    }
  }
  return report;
}

/// Deviation audit of an arbitrary deterministic mechanism (a fixed
/// branch of the private auction, the plain-Vickrey fixture, ...).
/// Misreports scale the reported valuation curve and, when enabled, the
/// reported budget: the full grid on each axis separately plus random
/// joint perturbations.
inline AuditReport audit_mechanism(
    const Instance& inst, const std::function<Outcome(const Instance&)>& mechanism,
    bool budget_misreports, const AuditOptions& opts = {}) {
  validate_instance(inst);
  AuditReport report;
  std::mt19937_64 g(opts.seed);

  const Outcome truthful = mechanism(inst);
  report.absorb_check(check_outcome(inst, truthful));

  for (int i = 0; i < static_cast<int>(inst.size()); ++i) {
    const Agent& agent = inst.agents[i];
    const double truthful_utility =
        agent_utility(agent, truthful.allocations[i], truthful.payments[i]);

    const auto consider = [&](double vs, double bs) {
      Instance misreported = inst;
      misreported.agents[i].valuation = scale_curve(agent.valuation, vs);
      misreported.agents[i].budget = agent.budget * bs;
      const Outcome out = mechanism(misreported);
      report.absorb_check(check_outcome(misreported, out));
      const double u = agent_utility(agent, out.allocations[i], out.payments[i]);
      if (u > truthful_utility + opts.tol)
        report.violations.push_back({i, vs, bs, truthful_utility, u});
    };

    for (int j = 1; j <= opts.grid; ++j) {
      const double scale = 3.0 * static_cast<double>(j) / static_cast<double>(opts.grid);
      consider(scale, 1.0);
      if (budget_misreports && scale != 1.0) consider(1.0, scale);
    }
    for (int j = 0; j < opts.random_deviations; ++j) {
      const double vs = 3.0 * detail::uniform01(g);
      const double bs = budget_misreports ? 3.0 * detail::uniform01(g) : 1.0;
      if (vs <= 0.0 || bs <= 0.0) continue;
      consider(vs, bs);
    }
  }
  return report;
}

/// Universal-truthfulness audit of the private auction: one fixed
/// randomness draw, all misreport axes.
inline AuditReport audit_private_fixed(const Instance& inst, const PrivateParams& params,
                                       const Randomness& rnd, const AuditOptions& opts = {}) {
  return audit_mechanism(
      inst, [&](const Instance& x) { return run_with_randomness(x, params, rnd); },
      /*budget_misreports=*/true, opts);
}

inline AuditReport audit_vickrey_plain(const Instance& inst, const AuditOptions& opts = {}) {
  return audit_mechanism(
      inst, [](const Instance& x) { return run_vickrey_plain(x); },
      /*budget_misreports=*/true, opts);
}

}  // namespace liqa
