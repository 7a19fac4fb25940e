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

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "liqa/liquid_welfare.hpp"
#include "liqa/model.hpp"

namespace liqa {

struct ReportRow {
  std::string instance_id;
  std::string mechanism;
  double welfare = 0.0;
  double revenue = 0.0;
  double opt = 0.0;
  double ratio = 0.0;
  int violations = 0;
  double ms = 0.0;
};

inline const char* kCsvHeader = "instance,mechanism,welfare,revenue,opt,ratio,violations,ms";

/// Shortest round-trippable decimal form of a double (17 significant
/// digits), so emitted CSVs parse back bitwise identical.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// opt / welfare, with the degenerate corners pinned: 1 when both are
/// zero, +inf when only the welfare is.
inline double welfare_ratio(double opt, double welfare_value) {
  if (welfare_value > 0.0) return opt / welfare_value;
  if (opt == 0.0) return 1.0;
  return std::numeric_limits<double>::infinity();
}

inline std::string to_csv_line(const ReportRow& r) {
  std::ostringstream os;
  os << r.instance_id << ',' << r.mechanism << ',' << fmt17(r.welfare) << ',' << fmt17(r.revenue)
     << ',' << fmt17(r.opt) << ',' << fmt17(r.ratio) << ',' << r.violations << ',' << fmt17(r.ms);
  return os.str();
}

inline std::string to_csv(const std::vector<ReportRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += to_csv_line(r);
    out += '\n';
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_double(const std::string& s, const char* what) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw std::runtime_error(std::string("bad csv field '") + what + "': " + s);
  return v;
}

}  // namespace detail

inline std::vector<ReportRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error("bad csv header: " + line);
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != 8) throw std::runtime_error("bad csv row: " + line);
    ReportRow r;
    r.instance_id = f[0];
    r.mechanism = f[1];
    r.welfare = detail::parse_double(f[2], "welfare");
    r.revenue = detail::parse_double(f[3], "revenue");
    r.opt = detail::parse_double(f[4], "opt");
    r.ratio = detail::parse_double(f[5], "ratio");
    r.violations = static_cast<int>(detail::parse_double(f[6], "violations"));
    r.ms = detail::parse_double(f[7], "ms");
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_csv_file(const std::vector<ReportRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv file: " + path);
  out << to_csv(rows);
}

/// Assembles a row with welfare and revenue recomputed from the outcome,
/// never copied from a mechanism's internal bookkeeping. Approximate
/// optimum estimates are lower bounds, so the achieved welfare (itself a
/// lower bound on the optimum) floors the reported opt; this keeps
/// ratio >= 1 on every row.
inline ReportRow make_report_row(std::string instance_id, std::string mechanism,
                                 const Instance& inst, const Outcome& out, double opt,
                                 int violations, double ms) {
  ReportRow r;
  r.instance_id = std::move(instance_id);
  r.mechanism = std::move(mechanism);
  r.welfare = welfare(inst, out);
  r.revenue = revenue(out);
  r.opt = std::max(opt, r.welfare);
  r.ratio = welfare_ratio(r.opt, r.welfare);
  r.violations = violations;
  r.ms = ms;
  return r;
}

}  // namespace liqa
