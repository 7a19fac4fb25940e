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

#include <catch2/catch_amalgamated.hpp>

#include "liqa/audit.hpp"
#include "liqa/generator.hpp"
#include "liqa/liquid_welfare.hpp"
#include "liqa/public_auction.hpp"
#include "liqa/rng.hpp"

using namespace liqa;

namespace {

constexpr double kPhi = kGoldenRatio;

Instance linear_instance(std::vector<double> rates, std::vector<double> budgets) {
  Instance inst;
  inst.regime = Regime::public_budget;
  for (std::size_t i = 0; i < rates.size(); ++i)
    inst.agents.push_back({budgets[i], ValuationCurve::make_linear(rates[i])});
  return inst;
}

Instance random_public(int n, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.n = n;
  return generate_instance(spec, seed);
}

}  // namespace

TEST_CASE("golden ratio satisfies its defining equation") {
  REQUIRE(std::abs(kPhi * kPhi - kPhi - 1.0) <= 1e-12);
}

TEST_CASE("allocation on the tight two-agent instance") {
  auto inst = linear_instance({1.0, 1.0 / kPhi}, {0.1, 0.9});
  auto res = allocate_public(inst);
  REQUIRE(res.regime.k == 2);
  REQUIRE(res.regime.alloc_case == AllocationCase::case_i);
  REQUIRE(res.regime.p0 == 1.0);
  REQUIRE_THAT(res.allocations[0], Catch::Matchers::WithinAbs(0.1, 1e-15));
  REQUIRE_THAT(res.allocations[1], Catch::Matchers::WithinAbs(0.9 / kPhi, 1e-15));

  const double w = welfare(inst, {res.allocations, std::vector<double>(2, 0.0)});
  REQUIRE_THAT(w, Catch::Matchers::WithinAbs(0.443769, 1e-6));
  const double opt = opt_linear_greedy(inst).value;
  REQUIRE_THAT(opt / w, Catch::Matchers::WithinAbs(1.4788, 1e-4));
  REQUIRE(opt / w <= kPhi);
}

TEST_CASE("single agent with small budget wins everything in case I") {
  auto res = allocate_public(linear_instance({1.0}, {1.0}));
  REQUIRE(res.regime.k == 1);
  REQUIRE(res.regime.alloc_case == AllocationCase::case_i);
  REQUIRE(res.allocations[0] == 1.0);
}

TEST_CASE("single agent with a large budget lands in the k = 0 regime") {
  auto res = allocate_public(linear_instance({1.0}, {10.0}));
  REQUIRE(res.regime.k == 0);
  REQUIRE(res.regime.alloc_case == AllocationCase::case_ii);
  REQUIRE(res.allocations[0] == 1.0 / kPhi);
  REQUIRE(res.regime.p0 == kPhi * 1.0);
}

TEST_CASE("allocation requires the public regime") {
  Instance inst = linear_instance({1.0}, {1.0});
  inst.regime = Regime::private_budget;
  REQUIRE_THROWS_AS(allocate_public(inst), std::invalid_argument);

  Instance pwl;
  pwl.regime = Regime::public_budget;
  pwl.agents.push_back({1.0, ValuationCurve::make_pwl({{0.0, 0.0}, {1.0, 1.0}})});
  REQUIRE_THROWS_AS(allocate_public(pwl), std::invalid_argument);
}

TEST_CASE("total allocation never exceeds the unit supply") {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    auto inst = random_public(1 + static_cast<int>(seed % 8), seed * 13 + 1);
    auto res = allocate_public(inst);
    double total = 0.0;
    for (double x : res.allocations) {
      REQUIRE(x >= 0.0);
      total += x;
    }
    REQUIRE(total <= 1.0 + 1e-12);
  }
}

TEST_CASE("bid curve evaluator matches a full auction rerun bitwise") {
  std::mt19937_64 g(555);
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto inst = random_public(2 + static_cast<int>(seed % 5), seed * 19 + 7);
    const int agent = static_cast<int>(seed % inst.size());
    PublicBidCurve curve(inst, agent);
    for (int t = 0; t < 25; ++t) {
      const double u = detail::uniform01(g) * 3.0 * std::max(inst.agents[agent].valuation.rate, 1.0);
      Instance mod = inst;
      mod.agents[agent].valuation = ValuationCurve::make_linear(u);
      REQUIRE(curve.allocation_at(u) == allocate_public(mod).allocations[agent]);
    }
  }
}

TEST_CASE("allocation is monotone in the reported rate") {
  std::mt19937_64 g(99);
  for (int trial = 0; trial < 300; ++trial) {
    auto inst = random_public(1 + trial % 6, 7000 + trial);
    const int agent = trial % static_cast<int>(inst.size());
    PublicBidCurve curve(inst, agent);
    const double scale = 3.0 * std::max(inst.agents[agent].valuation.rate, 1.0);
    double a = detail::uniform01(g) * scale;
    double b = detail::uniform01(g) * scale;
    if (a > b) std::swap(a, b);
    REQUIRE(curve.allocation_at(b) >= curve.allocation_at(a) - 1e-12);
  }
}

TEST_CASE("single-agent allocation curve has the two known pieces") {
  auto inst = linear_instance({1.0}, {1.0});
  auto pieces = myerson_pieces(inst, 0);
  REQUIRE(pieces.size() == 2);
  REQUIRE(pieces[0].lo == 0.0);
  REQUIRE_THAT(pieces[0].hi, Catch::Matchers::WithinAbs(1.0 / kPhi, 1e-15));
  REQUIRE(pieces[0].form == RegimePiece::Form::constant);
  REQUIRE_THAT(pieces[0].a, Catch::Matchers::WithinAbs(1.0 / kPhi, 1e-15));
  REQUIRE(pieces[1].hi == 1.0);
  REQUIRE(pieces[1].form == RegimePiece::Form::linear_in_report);
  REQUIRE_THAT(pieces[1].a, Catch::Matchers::WithinAbs(1.0, 1e-15));

  // sampled agreement with the direct evaluator
  PublicBidCurve curve(inst, 0);
  std::mt19937_64 g(1);
  for (int t = 0; t < 10000; ++t) {
    const double u = 1e-9 + detail::uniform01(g) * (1.0 - 2e-9);
    const auto it = std::find_if(pieces.begin(), pieces.end(),
                                 [&](const RegimePiece& p) { return u > p.lo && u <= p.hi; });
    REQUIRE(it != pieces.end());
    REQUIRE_THAT(it->value_at(u), Catch::Matchers::WithinAbs(curve.allocation_at(u), 1e-12));
  }
}

TEST_CASE("pieces partition the report axis and match the evaluator") {
  std::mt19937_64 g(2718);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto inst = random_public(2 + static_cast<int>(seed % 5), 9000 + seed);
    const int agent = static_cast<int>(seed % inst.size());
    const double v_i = inst.agents[agent].valuation.rate;
    const double upper = 3.0 * v_i;
    auto pieces = myerson_pieces(inst, agent, upper);
    REQUIRE_FALSE(pieces.empty());
    REQUIRE(pieces.front().lo == 0.0);
    REQUIRE(pieces.back().hi == upper);
    for (std::size_t i = 1; i < pieces.size(); ++i) REQUIRE(pieces[i].lo == pieces[i - 1].hi);

    PublicBidCurve curve(inst, agent);
    for (int t = 0; t < 200; ++t) {
      const double u = detail::uniform01(g) * upper;
      if (u <= 0.0) continue;
      const auto it = std::find_if(pieces.begin(), pieces.end(),
                                   [&](const RegimePiece& p) { return u > p.lo && u <= p.hi; });
      REQUIRE(it != pieces.end());
      const double x = curve.allocation_at(u);
      REQUIRE_THAT(it->value_at(u), Catch::Matchers::WithinAbs(x, 1e-10 * std::max(1.0, x)));
    }
  }
}

TEST_CASE("an always-losing agent gets a single zero piece") {
  auto inst = linear_instance({1.0, 0.1}, {1.0, 1.0});
  auto pieces = myerson_pieces(inst, 1);
  REQUIRE(pieces.size() == 1);
  REQUIRE(pieces[0].form == RegimePiece::Form::constant);
  REQUIRE(pieces[0].a == 0.0);
}

TEST_CASE("clamped piece above the price level is constant") {
  auto inst = linear_instance({1.0, 1.0 / kPhi}, {0.1, 0.9});
  auto pieces = myerson_pieces(inst, 0, 3.0);
  // locate the piece containing u = 2 (above p0 = 1): allocation stays 0.1
  const auto it = std::find_if(pieces.begin(), pieces.end(),
                               [](const RegimePiece& p) { return 2.0 > p.lo && 2.0 <= p.hi; });
  REQUIRE(it != pieces.end());
  REQUIRE(it->form == RegimePiece::Form::constant);
  REQUIRE_THAT(it->a, Catch::Matchers::WithinAbs(0.1, 1e-12));
  // and the piece containing u = 1 evaluates to 0.1 there
  const auto at1 = std::find_if(pieces.begin(), pieces.end(),
                                [](const RegimePiece& p) { return 1.0 > p.lo && 1.0 <= p.hi; });
  REQUIRE(at1 != pieces.end());
  REQUIRE_THAT(at1->value_at(1.0), Catch::Matchers::WithinAbs(0.1, 1e-12));
}

TEST_CASE("single-agent payment has the closed form") {
  auto inst = linear_instance({1.0}, {1.0});
  auto out = pay_public(inst);
  REQUIRE(out.allocations[0] == 1.0);
  const double expected = (1.0 - 1.0 / (kPhi * kPhi)) / 2.0;
  REQUIRE_THAT(out.payments[0], Catch::Matchers::WithinAbs(expected, 1e-12));
  REQUIRE_THAT(out.payments[0], Catch::Matchers::WithinAbs(0.309017, 1e-6));
  REQUIRE_THAT(revenue(out), Catch::Matchers::WithinAbs(0.309017, 1e-6));
}

TEST_CASE("zero-allocation agents pay nothing") {
  auto inst = linear_instance({1.0, 0.1}, {1.0, 1.0});
  auto out = pay_public(inst);
  REQUIRE(out.allocations[1] == 0.0);
  REQUIRE(out.payments[1] == 0.0);
}

TEST_CASE("piece payments match adaptive quadrature") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto inst = random_public(1 + static_cast<int>(seed % 6), 11000 + seed);
    auto out = pay_public(inst);
    for (int i = 0; i < static_cast<int>(inst.size()); ++i) {
      const double quad = payment_quadrature(inst, i);
      REQUIRE_THAT(out.payments[i], Catch::Matchers::WithinAbs(quad, 1e-9));
    }
  }
}

TEST_CASE("payments are budget feasible") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto inst = random_public(1 + static_cast<int>(seed % 7), 13000 + seed);
    auto out = pay_public(inst);
    auto check = check_outcome(inst, out);
    REQUIRE(check.ok());
    REQUIRE(welfare(inst, out) >= revenue(out) - 1e-9);
  }
}

TEST_CASE("zero-rate agents are allocated nothing and pay nothing") {
  auto inst = linear_instance({1.0, 0.0}, {1.0, 5.0});
  auto out = pay_public(inst);
  REQUIRE(out.allocations[1] == 0.0);
  REQUIRE(out.payments[1] == 0.0);
  REQUIRE(out.allocations[0] == 1.0);

  auto all_zero = linear_instance({0.0, 0.0}, {1.0, 2.0});
  auto res = allocate_public(all_zero);
  for (double x : res.allocations) REQUIRE(x == 0.0);
  auto paid = pay_public(all_zero);
  for (double p : paid.payments) REQUIRE(p == 0.0);
}

TEST_CASE("zero-budget agents win nothing and pay nothing") {
  auto inst = linear_instance({2.0, 1.0}, {0.0, 1.0});
  auto out = pay_public(inst);
  REQUIRE(out.allocations[0] == 0.0);
  REQUIRE(out.payments[0] == 0.0);
  REQUIRE(check_outcome(inst, out).ok());
}

TEST_CASE("exactly tied rates resolve by the stable index rule") {
  auto inst = linear_instance({1.0, 1.0, 1.0}, {0.2, 0.3, 0.4});
  auto res = allocate_public(inst);
  REQUIRE(res.regime.sorted_order == std::vector<int>{0, 1, 2});

  // curve evaluation at an exact tie agrees with a full rerun
  for (int agent : {0, 1, 2}) {
    PublicBidCurve curve(inst, agent);
    REQUIRE(curve.allocation_at(1.0) == res.allocations[agent]);
  }
}

TEST_CASE("tight instance payments respect both budgets") {
  auto inst = linear_instance({1.0, 1.0 / kPhi}, {0.1, 0.9});
  auto out = pay_public(inst);
  REQUIRE(out.payments[0] <= 0.1);
  REQUIRE(out.payments[1] <= 0.9);
  for (int i = 0; i < 2; ++i)
    REQUIRE_THAT(out.payments[i], Catch::Matchers::WithinAbs(payment_quadrature(inst, i), 1e-9));
}

TEST_CASE("case II last winner pays at most its budget over phi") {
  int seen = 0;
  for (std::uint64_t seed = 1; seed <= 200 && seen < 25; ++seed) {
    auto inst = random_public(2 + static_cast<int>(seed % 5), 17000 + seed);
    auto res = allocate_public(inst);
    if (res.regime.alloc_case != AllocationCase::case_ii) continue;
    if (res.regime.k >= static_cast<int>(inst.size())) continue;
    ++seen;
    const int last = res.regime.sorted_order[res.regime.k];
    auto out = pay_public(inst);
    REQUIRE(out.payments[last] <= inst.agents[last].budget / kPhi + 1e-12);
  }
  REQUIRE(seen > 0);
}

TEST_CASE("welfare stays within the golden-ratio factor of the optimum") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto inst = random_public(1 + static_cast<int>(seed % 8), 19000 + seed);
    auto res = allocate_public(inst);
    const double w = welfare(inst, {res.allocations, std::vector<double>(inst.size(), 0.0)});
    const double opt = opt_linear_greedy(inst).value;
    REQUIRE(w >= opt / kPhi - 1e-9);
  }
}

TEST_CASE("no profitable misreport exists on random instances") {
  AuditOptions opts;
  opts.grid = 200;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto inst = random_public(1 + static_cast<int>(seed % 6), 23000 + seed);
    opts.seed = seed;
    auto report = audit_public(inst, opts);
    CAPTURE(seed);
    REQUIRE(report.violations.empty());
    REQUIRE(report.total_violations() == 0);
  }
}

TEST_CASE("pieces survive a dense scan on larger instances") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    auto inst = random_public(10, 50000 + seed);
    const int agent = static_cast<int>(seed * 3 % 10);
    const double upper = 3.0 * inst.agents[agent].valuation.rate;
    auto pieces = myerson_pieces(inst, agent, upper);
    PublicBidCurve curve(inst, agent);
    for (int i = 1; i <= 2000; ++i) {
      const double u = upper * static_cast<double>(i) / 2000.0;
      const auto it = std::find_if(pieces.begin(), pieces.end(),
                                   [&](const RegimePiece& p) { return u > p.lo && u <= p.hi; });
      REQUIRE(it != pieces.end());
      const double x = curve.allocation_at(u);
      REQUIRE_THAT(it->value_at(u), Catch::Matchers::WithinAbs(x, 1e-10 * std::max(1.0, x)));
    }
  }
}

TEST_CASE("allocation stays monotone across every piece boundary") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    auto inst = random_public(2 + static_cast<int>(seed % 5), 60000 + seed);
    const int agent = static_cast<int>(seed % inst.size());
    const double upper = 3.0 * inst.agents[agent].valuation.rate;
    if (upper <= 0.0) continue;
    auto pieces = myerson_pieces(inst, agent, upper);
    PublicBidCurve curve(inst, agent);
    for (const auto& piece : pieces) {
      if (piece.lo <= 0.0) continue;
      const double b = piece.lo;
      const double below = curve.allocation_at(b * (1.0 - 1e-9));
      const double at = curve.allocation_at(b);
      const double above = curve.allocation_at(b * (1.0 + 1e-9));
      REQUIRE(at >= below - 1e-12);
      REQUIRE(above >= at - 1e-12);
    }
  }
}

TEST_CASE("reports tied exactly with another rate are not profitable") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    auto inst = random_public(3 + static_cast<int>(seed % 4), 70000 + seed);
    const int agent = static_cast<int>(seed % inst.size());
    const Agent& a = inst.agents[agent];
    if (a.valuation.rate <= 0.0) continue;
    PublicBidCurve curve(inst, agent);
    auto pieces = myerson_pieces(inst, agent, 4.0 * a.valuation.rate);
    const double x_true = curve.allocation_at(a.valuation.rate);
    const double truthful =
        a.valuation.rate * x_true -
        myerson_payment_from_pieces(pieces, a.valuation.rate, x_true);
    for (int j = 0; j < static_cast<int>(inst.size()); ++j) {
      if (j == agent) continue;
      const double r = inst.agents[j].valuation.rate;  // exact tie with agent j
      if (r <= 0.0 || r > 4.0 * a.valuation.rate) continue;
      const double x = curve.allocation_at(r);
      const double u = a.valuation.rate * x - myerson_payment_from_pieces(pieces, r, x);
      REQUIRE(u <= truthful + 1e-9);
    }
  }
}

TEST_CASE("audit utilities agree with direct payment reruns") {
  auto inst = linear_instance({1.0, 1.0 / kPhi, 0.4}, {0.1, 0.9, 0.3});
  const int agent = 1;
  const double v_true = inst.agents[agent].valuation.rate;
  PublicBidCurve curve(inst, agent);
  auto pieces = myerson_pieces(inst, agent, 3.0 * v_true);
  for (double scale : {0.25, 0.5, 0.8, 1.0, 1.3, 2.0, 2.9}) {
    const double r = scale * v_true;
    Instance mod = inst;
    mod.agents[agent].valuation = ValuationCurve::make_linear(r);
    auto direct = pay_public(mod);
    const double x = curve.allocation_at(r);
    REQUIRE(x == direct.allocations[agent]);
    const double p = myerson_payment_from_pieces(pieces, r, x);
    REQUIRE_THAT(p, Catch::Matchers::WithinAbs(direct.payments[agent], 1e-10));
  }
}
