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

#include "liqa/generator.hpp"
#include "liqa/instance_io.hpp"
#include "liqa/model.hpp"

using namespace liqa;

namespace {

Agent linear_agent(double rate, double budget) {
  return Agent{budget, ValuationCurve::make_linear(rate)};
}

Instance random_private_instance(int n, std::uint64_t seed, bool pwl) {
  GeneratorSpec spec;
  spec.n = n;
  spec.kind = pwl ? GeneratorSpec::Kind::pwl : GeneratorSpec::Kind::linear;
  spec.regime = Regime::private_budget;
  return generate_instance(spec, seed);
}

}  // namespace

TEST_CASE("linear valuation evaluates as rate * x") {
  auto c = ValuationCurve::make_linear(2.0);
  REQUIRE(evaluate_valuation(c, 0.5) == 1.0);
  REQUIRE(evaluate_valuation(c, 0.0) == 0.0);
  REQUIRE(evaluate_valuation(c, 1.0) == 2.0);
}

TEST_CASE("pwl valuation interpolates between breakpoints") {
  auto c = ValuationCurve::make_pwl({{0.0, 0.0}, {0.5, 1.0}, {1.0, 1.0}});
  REQUIRE(evaluate_valuation(c, 0.25) == 0.5);
  REQUIRE(evaluate_valuation(c, 0.75) == 1.0);
  REQUIRE(evaluate_valuation(c, 0.0) == 0.0);
}

TEST_CASE("valuation hits breakpoint table exactly") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto inst = random_private_instance(3, seed, /*pwl=*/true);
    for (const auto& a : inst.agents) {
      for (const auto& pt : a.valuation.points)
        REQUIRE(evaluate_valuation(a.valuation, pt.x) == pt.v);
    }
  }
}

TEST_CASE("valuation argument domain is [0, 1]") {
  auto c = ValuationCurve::make_linear(1.0);
  REQUIRE_THROWS_AS(evaluate_valuation(c, -0.01), std::domain_error);
  REQUIRE_THROWS_AS(evaluate_valuation(c, 1.01), std::domain_error);
}

TEST_CASE("curve invariants are enforced") {
  REQUIRE_THROWS_AS(ValuationCurve::make_linear(-1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(ValuationCurve::make_pwl({{0.0, 0.0}}), std::invalid_argument);
  // first point must be the origin
  REQUIRE_THROWS_AS(ValuationCurve::make_pwl({{0.0, 0.5}, {1.0, 1.0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(ValuationCurve::make_pwl({{0.1, 0.0}, {1.0, 1.0}}), std::invalid_argument);
  // last point must sit at x = 1
  REQUIRE_THROWS_AS(ValuationCurve::make_pwl({{0.0, 0.0}, {0.9, 1.0}}), std::invalid_argument);
  // strictly increasing x, non-decreasing v
  REQUIRE_THROWS_AS(ValuationCurve::make_pwl({{0.0, 0.0}, {0.5, 1.0}, {0.5, 2.0}, {1.0, 2.0}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(ValuationCurve::make_pwl({{0.0, 0.0}, {0.5, 1.0}, {1.0, 0.5}}),
                    std::invalid_argument);
}

TEST_CASE("liquid value caps at the budget") {
  REQUIRE(liquid_value(linear_agent(2.0, 1.0), 1.0) == 1.0);
  REQUIRE(liquid_value(linear_agent(2.0, 1.0), 0.25) == 0.5);
  Agent pwl{3.0, ValuationCurve::make_pwl({{0.0, 0.0}, {1.0, 10.0}})};
  REQUIRE(liquid_value(pwl, 0.5) == 3.0);
}

TEST_CASE("liquid value is zero at zero and monotone below the cap") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    for (bool pwl : {false, true}) {
      auto inst = random_private_instance(2, seed, pwl);
      for (const auto& a : inst.agents) {
        REQUIRE(liquid_value(a, 0.0) == 0.0);
        double prev = 0.0;
        for (int i = 1; i <= 64; ++i) {
          double x = static_cast<double>(i) / 64.0;
          double lv = liquid_value(a, x);
          REQUIRE(lv >= prev);
          REQUIRE(lv <= a.budget);
          prev = lv;
        }
      }
    }
  }
}

TEST_CASE("scale_curve scales values and keeps breakpoints") {
  auto c = ValuationCurve::make_pwl({{0.0, 0.0}, {0.25, 1.0}, {1.0, 4.0}});
  auto s = scale_curve(c, 0.5);
  REQUIRE(s.points[1].x == 0.25);
  REQUIRE(s.points[1].v == 0.5);
  REQUIRE(s.points[2].v == 2.0);
  REQUIRE(scale_curve(ValuationCurve::make_linear(2.0), 1.5).rate == 3.0);
}

TEST_CASE("instance invariants") {
  Instance empty;
  REQUIRE_THROWS_AS(validate_instance(empty), std::invalid_argument);

  Instance pub;
  pub.regime = Regime::public_budget;
  pub.agents.push_back({1.0, ValuationCurve::make_pwl({{0.0, 0.0}, {1.0, 1.0}})});
  REQUIRE_THROWS_AS(validate_instance(pub), std::invalid_argument);

  Agent bad = linear_agent(1.0, -1.0);
  REQUIRE_THROWS_AS(validate_agent(bad), std::invalid_argument);
}

TEST_CASE("outcome checks flag the right invariants") {
  Instance inst;
  inst.agents = {linear_agent(1.0, 0.5), linear_agent(2.0, 1.0)};

  Outcome ok = Outcome::zeros(2);
  ok.allocations = {0.4, 0.6};
  ok.payments = {0.5, 1.0};
  REQUIRE(check_outcome(inst, ok).ok());

  Outcome over_supply = ok;
  over_supply.allocations = {0.6, 0.5};
  REQUIRE_FALSE(check_outcome(inst, over_supply).supply_ok);

  Outcome over_budget = ok;
  over_budget.payments = {0.5 + 1e-9, 1.0};
  REQUIRE_FALSE(check_outcome(inst, over_budget).budget_ok);

  Outcome negative = ok;
  negative.allocations = {-0.1, 0.5};
  REQUIRE_FALSE(check_outcome(inst, negative).nonneg_ok);

  Outcome wrong_size = Outcome::zeros(3);
  REQUIRE_THROWS_AS(check_outcome(inst, wrong_size), std::invalid_argument);
}

TEST_CASE("instance json round-trips bitwise") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (bool pwl : {false, true}) {
      auto inst = random_private_instance(4, seed, pwl);
      auto back = parse_instance(instance_to_json(inst).dump());
      REQUIRE(back.regime == inst.regime);
      REQUIRE(back.size() == inst.size());
      for (std::size_t i = 0; i < inst.size(); ++i) {
        REQUIRE(back.agents[i].budget == inst.agents[i].budget);
        REQUIRE(back.agents[i].valuation.kind == inst.agents[i].valuation.kind);
        if (pwl) {
          const auto& p0 = inst.agents[i].valuation.points;
          const auto& p1 = back.agents[i].valuation.points;
          REQUIRE(p0.size() == p1.size());
          for (std::size_t j = 0; j < p0.size(); ++j) {
            REQUIRE(p0[j].x == p1[j].x);
            REQUIRE(p0[j].v == p1[j].v);
          }
        } else {
          REQUIRE(back.agents[i].valuation.rate == inst.agents[i].valuation.rate);
        }
      }
    }
  }
}

TEST_CASE("malformed instance files carry a field diagnostic") {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      parse_instance(text);
      FAIL("expected InstanceFormatError for: " << text);
    } catch (const InstanceFormatError& e) {
      REQUIRE(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error("{", "parse error");
  expect_error(R"({"agents": []})", "regime");
  expect_error(R"({"regime": "both", "agents": []})", "regime");
  expect_error(R"({"regime": "public", "agents": [{"budget": 1}]})", "agents[0]");
  expect_error(R"({"regime": "public", "agents": [{"budget": "x", "valuation": {"kind":"linear","rate":1}}]})",
               "budget");
  expect_error(R"({"regime": "public", "agents": [{"budget": 1, "valuation": {"kind":"exotic"}}]})",
               "kind");
  expect_error(R"({"regime": "public", "agents": [{"budget": 1, "valuation": {"kind":"pwl","points":[[0,0],[1,1]]}}]})",
               "linear");
  expect_error(R"({"regime": "public", "agents": []})", "at least one agent");
  expect_error(R"({"regime": "private", "agents": [{"budget": 1, "valuation": {"kind":"pwl","points":[[0,0.5],[1,1]]}}]})",
               "agents[0]");
}
