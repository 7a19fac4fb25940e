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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "liqa/demand.hpp"
#include "liqa/liquid_welfare.hpp"
#include "liqa/model.hpp"
#include "liqa/rng.hpp"

namespace liqa {

/// Parameters of the private-budget auction: the Vickrey price gap gamma,
/// the sampling price fraction beta, and the probability mass mu spent on
/// the two modified Vickrey branches (mu/3 and 2mu/3; the remaining 1-mu
/// runs the random sampling auction).
struct PrivateParams {
  double beta = 3.0 / 10.0;
  double gamma = std::sqrt(10.0 / 9.0);
  double mu = 5.0 / 7.0;
};

inline void validate_params(const PrivateParams& p) {
  if (!(p.beta > 0.0 && p.beta < 0.5)) throw std::invalid_argument("beta must be in (0, 1/2)");
  if (!(p.gamma > 1.0)) throw std::invalid_argument("gamma must be > 1");
  if (!(p.mu >= 0.0 && p.mu <= 1.0)) throw std::invalid_argument("mu must be in [0, 1]");
}

enum class Branch { mv1, mv2, rs };

/// One fixed draw of the auction's randomness: the branch and, for the
/// branches that need it, the S/T partition (one fair coin per agent).
struct Randomness {
  Branch branch = Branch::mv1;
  std::vector<bool> in_s;  // empty for the mv1 branch
};

inline Randomness draw_randomness(const PrivateParams& params, std::size_t n,
                                  std::uint64_t seed) {
  validate_params(params);
  std::mt19937_64 g(seed);
  const double u = detail::uniform01(g);
  Randomness r;
  if (u < params.mu / 3.0) {
    r.branch = Branch::mv1;
  } else if (u < params.mu) {
    r.branch = Branch::mv2;
  } else {
    r.branch = Branch::rs;
  }
  if (r.branch != Branch::mv1) {
    r.in_s.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.in_s[i] = detail::coin_flip(g);
  }
  return r;
}

namespace detail {

/// Vickrey auction on the capped whole-unit values with price gap gamma.
/// gamma = 1 with the index tie-break favoring later agents reproduces
/// the plain (untruthful) Vickrey auction.
inline Outcome vickrey_on_caps(const Instance& inst, double gamma, bool favor_higher_index) {
  const std::size_t n = inst.size();
  Outcome out = Outcome::zeros(n);
  std::vector<double> vb(n);
  for (std::size_t i = 0; i < n; ++i) vb[i] = v_bar(inst.agents[i]);

  std::size_t i1 = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (vb[i] > vb[i1] || (favor_higher_index && vb[i] == vb[i1])) i1 = i;
  }
  double second = 0.0;
  bool have_second = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == i1) continue;
    if (!have_second || vb[i] > second) {
      second = vb[i];
      have_second = true;
    }
  }
  if (vb[i1] >= gamma * second) {
    out.allocations[i1] = 1.0;
    out.payments[i1] = gamma * second;
  }
  return out;
}

inline std::vector<int> members(const std::vector<bool>& in_s, bool want) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < in_s.size(); ++i)
    if (in_s[i] == want) idx.push_back(static_cast<int>(i));
  return idx;
}

/// Optimal liquid welfare of an agent subset: the exact greedy for
/// all-linear subsets, otherwise the grid DP on the smallest
/// breakpoint-aligned grid (falling back to a fixed resolution when no
/// small common denominator exists).
inline double subset_opt_value(const Instance& inst, const std::vector<int>& idxs) {
  if (idxs.empty()) return 0.0;
  Instance sub;
  sub.regime = Regime::private_budget;
  for (int i : idxs) sub.agents.push_back(inst.agents[i]);
  if (all_linear(sub)) return opt_linear_greedy(sub).value;
  const long aligned = aligned_resolution(sub, 1, 1024);
  return opt_dp(sub, aligned > 0 ? aligned : 128).value;
}

/// Deterministic pairwise reduction in index order, so enumerated
/// expectations are bitwise reproducible regardless of evaluation order.
inline double pairwise_sum(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::size_t n = v.size();
  while (n > 1) {
    std::size_t h = 0;
    for (std::size_t i = 0; i + 1 < n; i += 2) v[h++] = v[i] + v[i + 1];
    if (n % 2) v[h++] = v[n - 1];
    n = h;
  }
  return v[0];
}

}  // namespace detail

/// First modified Vickrey auction: the agent with the highest capped
/// value wins the whole unit at gamma times the second-highest capped
/// value, and the item is withheld when the top two are within the gap.
/// A single agent wins at price 0 (the second-highest value is taken
/// as 0). Argmax ties break toward the lowest index.
inline Outcome run_mv1(const Instance& inst, const PrivateParams& params = {}) {
  validate_instance(inst);
  validate_params(params);
  return detail::vickrey_on_caps(inst, params.gamma, /*favor_higher_index=*/false);
}

/// Plain Vickrey on capped values (gamma = 1). Kept as the contrast
/// fixture for the deviation audits; with budget misreports allowed it is
/// exploitable, which is exactly what the audit is expected to find.
inline Outcome run_vickrey_plain(const Instance& inst, bool favor_higher_index = true) {
  validate_instance(inst);
  return detail::vickrey_on_caps(inst, 1.0, favor_higher_index);
}

/// Second modified Vickrey auction: the whole unit goes to the first
/// agent of S (in ascending index order) willing to pay the discounted
/// top capped value of T. An empty T makes that price 0.
inline Outcome run_mv2(const Instance& inst, const std::vector<bool>& in_s,
                       const PrivateParams& params = {}) {
  validate_instance(inst);
  validate_params(params);
  if (in_s.size() != inst.size())
    throw std::invalid_argument("partition size does not match instance");
  const std::size_t n = inst.size();
  Outcome out = Outcome::zeros(n);

  double v_t = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (!in_s[i]) v_t = std::max(v_t, v_bar(inst.agents[i]));
  const double price = v_t / params.gamma;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_s[i]) continue;
    if (v_bar(inst.agents[i]) >= price) {
      out.allocations[i] = 1.0;
      out.payments[i] = price;
      break;
    }
  }
  return out;
}

namespace detail {

/// Random sampling core with the two group prices already fixed. Each
/// group buys from its own half-unit pool at the posted price, in
/// ascending index order, each agent taking its most profitable feasible
/// fraction.
inline Outcome rs_with_prices(const Instance& inst, const std::vector<bool>& in_s,
                              double price_s, double price_t) {
  const std::size_t n = inst.size();
  Outcome out = Outcome::zeros(n);
  double remaining_s = 0.5, remaining_t = 0.5;
  for (int pass = 0; pass < 2; ++pass) {
    const bool want = pass == 0;
    const double price = want ? price_s : price_t;
    double& remaining = want ? remaining_s : remaining_t;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_s[i] != want) continue;
      const Agent& a = inst.agents[i];
      const double x = constrained_demand(a, price, remaining);
      out.allocations[i] = x;
      // price * x can round one ulp past the budget cap
      out.payments[i] = std::min(price * x, a.budget);
      remaining -= x;
    }
  }
  return out;
}

}  // namespace detail

/// Random sampling auction: each group is priced at beta times the other
/// group's optimal liquid welfare.
inline Outcome run_rs(const Instance& inst, const std::vector<bool>& in_s,
                      const PrivateParams& params = {}) {
  validate_instance(inst);
  validate_params(params);
  if (in_s.size() != inst.size())
    throw std::invalid_argument("partition size does not match instance");
  const double opt_s = detail::subset_opt_value(inst, detail::members(in_s, true));
  const double opt_t = detail::subset_opt_value(inst, detail::members(in_s, false));
  return detail::rs_with_prices(inst, in_s, params.beta * opt_t, params.beta * opt_s);
}

inline Outcome run_with_randomness(const Instance& inst, const PrivateParams& params,
                                   const Randomness& rnd) {
  switch (rnd.branch) {
    case Branch::mv1: return run_mv1(inst, params);
    case Branch::mv2: return run_mv2(inst, rnd.in_s, params);
    case Branch::rs: return run_rs(inst, rnd.in_s, params);
  }
  throw std::logic_error("unreachable branch");
}

/// One seeded run of the composed private-budget auction. Identical seeds
/// produce identical randomness and hence bitwise identical outcomes.
inline Outcome run_private(const Instance& inst, const PrivateParams& params,
                           std::uint64_t seed) {
  validate_instance(inst);
  return run_with_randomness(inst, params, draw_randomness(params, inst.size(), seed));
}

/// Expected liquid welfare of each branch with the partition randomness
/// enumerated exactly (all 2^n equally likely partitions), plus the
/// mixture total. Feasible for n <= 16.
struct BranchExpectation {
  double ev_mv1 = 0.0;
  double ev_mv2 = 0.0;
  double ev_rs = 0.0;
  double total = 0.0;
};

inline BranchExpectation exact_expectation(const Instance& inst, const PrivateParams& params) {
  validate_instance(inst);
  validate_params(params);
  const std::size_t n = inst.size();
  if (n > 16) throw std::invalid_argument("exact_expectation enumerates 2^n partitions; n > 16");

  BranchExpectation ev;
  ev.ev_mv1 = welfare(inst, run_mv1(inst, params));

  const std::uint32_t count = 1u << n;
  std::vector<double> opt_of_mask(count);
  std::vector<int> idxs;
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    idxs.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) idxs.push_back(static_cast<int>(i));
    opt_of_mask[mask] = detail::subset_opt_value(inst, idxs);
  }

  std::vector<double> w2(count), w3(count);
  std::vector<bool> in_s(n);
  const std::uint32_t full = count - 1;
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    for (std::size_t i = 0; i < n; ++i) in_s[i] = (mask & (1u << i)) != 0;
    w2[mask] = welfare(inst, run_mv2(inst, in_s, params));
    const double price_s = params.beta * opt_of_mask[full & ~mask];
    const double price_t = params.beta * opt_of_mask[mask];
    w3[mask] = welfare(inst, detail::rs_with_prices(inst, in_s, price_s, price_t));
  }
  const double scale = 1.0 / static_cast<double>(count);
  ev.ev_mv2 = detail::pairwise_sum(std::move(w2)) * scale;
  ev.ev_rs = detail::pairwise_sum(std::move(w3)) * scale;
  ev.total = params.mu / 3.0 * ev.ev_mv1 + 2.0 * params.mu / 3.0 * ev.ev_mv2 +
             (1.0 - params.mu) * ev.ev_rs;
  return ev;
}

}  // namespace liqa
