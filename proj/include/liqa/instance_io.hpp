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

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "liqa/model.hpp"

namespace liqa {

/// Raised on malformed instance files; message carries a location
/// (byte offset or field path) suitable for CLI diagnostics.
struct InstanceFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw InstanceFormatError(where + ": expected a number");
  return j.get<double>();
}

}  // namespace detail

// Canonical instance format:
// {"regime": "public"|"private",
//  "agents": [{"budget": <number>,
//              "valuation": {"kind":"linear","rate":<number>}
//                         | {"kind":"pwl","points":[[x,v],...]}}]}
// Agent order in the file is the canonical agent index order.

inline Instance instance_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InstanceFormatError("top level: expected an object");
  if (!j.contains("regime")) throw InstanceFormatError("top level: missing field 'regime'");
  if (!j.contains("agents")) throw InstanceFormatError("top level: missing field 'agents'");

  Instance inst;
  const auto& regime = j.at("regime");
  if (regime == "public") {
    inst.regime = Regime::public_budget;
  } else if (regime == "private") {
    inst.regime = Regime::private_budget;
  } else {
    throw InstanceFormatError("regime: expected \"public\" or \"private\"");
  }

  const auto& agents = j.at("agents");
  if (!agents.is_array()) throw InstanceFormatError("agents: expected an array");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string where = "agents[" + std::to_string(i) + "]";
    const auto& ja = agents[i];
    if (!ja.is_object()) throw InstanceFormatError(where + ": expected an object");
    if (!ja.contains("budget")) throw InstanceFormatError(where + ": missing field 'budget'");
    if (!ja.contains("valuation")) throw InstanceFormatError(where + ": missing field 'valuation'");

    Agent a;
    a.budget = detail::require_number(ja.at("budget"), where + ".budget");

    const auto& jv = ja.at("valuation");
    if (!jv.is_object() || !jv.contains("kind"))
      throw InstanceFormatError(where + ".valuation: missing field 'kind'");
    try {
      if (jv.at("kind") == "linear") {
        if (!jv.contains("rate"))
          throw InstanceFormatError(where + ".valuation: missing field 'rate'");
        a.valuation =
            ValuationCurve::make_linear(detail::require_number(jv.at("rate"), where + ".rate"));
      } else if (jv.at("kind") == "pwl") {
        if (!jv.contains("points") || !jv.at("points").is_array())
          throw InstanceFormatError(where + ".valuation: missing array field 'points'");
        std::vector<CurvePoint> pts;
        for (const auto& jp : jv.at("points")) {
          if (!jp.is_array() || jp.size() != 2)
            throw InstanceFormatError(where + ".valuation.points: expected [x, v] pairs");
          pts.push_back({detail::require_number(jp[0], where + ".points[].x"),
                         detail::require_number(jp[1], where + ".points[].v")});
        }
        a.valuation = ValuationCurve::make_pwl(std::move(pts));
      } else {
        throw InstanceFormatError(where + ".valuation.kind: expected \"linear\" or \"pwl\"");
      }
      validate_agent(a);
    } catch (const std::invalid_argument& e) {
      throw InstanceFormatError(where + ": " + e.what());
    }
    inst.agents.push_back(std::move(a));
  }

  try {
    validate_instance(inst);
  } catch (const std::invalid_argument& e) {
    throw InstanceFormatError(std::string("instance: ") + e.what());
  }
  return inst;
}

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  j["regime"] = inst.regime == Regime::public_budget ? "public" : "private";
  j["agents"] = nlohmann::json::array();
  for (const auto& a : inst.agents) {
    nlohmann::json jv;
    if (a.valuation.kind == CurveKind::linear) {
      jv = {{"kind", "linear"}, {"rate", a.valuation.rate}};
    } else {
      auto pts = nlohmann::json::array();
      for (const auto& p : a.valuation.points) pts.push_back({p.x, p.v});
      jv = {{"kind", "pwl"}, {"points", pts}};
    }
    j["agents"].push_back({{"budget", a.budget}, {"valuation", jv}});
  }
  return j;
}

inline Instance parse_instance(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InstanceFormatError(std::string("json parse error: ") + e.what());
  }
  return instance_from_json(j);
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InstanceFormatError("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

inline void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InstanceFormatError("cannot write instance file: " + path);
  out << instance_to_json(inst).dump(2) << '\n';
}

}  // namespace liqa
