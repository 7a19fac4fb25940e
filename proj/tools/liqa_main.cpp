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

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "liqa/liqa.hpp"

namespace {

using Clock = std::chrono::steady_clock;

enum class LogLevel { off = 0, info = 1, debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("LIQ_AUCTION_LOG");
  if (!env) return LogLevel::off;
  const std::string v = env;
  if (v == "debug") return LogLevel::debug;
  if (v == "info") return LogLevel::info;
  return LogLevel::off;
}

void log_line(LogLevel level, const std::string& msg) {
  if (static_cast<int>(log_level()) >= static_cast<int>(level))
    std::cerr << "[liqa] " << msg << '\n';
}

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string instance_stem(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = name.find_last_of('.');
  if (dot != std::string::npos) name = name.substr(0, dot);
  return name.empty() ? "instance" : name;
}

std::string padded_index(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", i);
  return buf;
}

/// Reference optimum for reporting: exact greedy for all-linear
/// instances, otherwise the (possibly approximate) grid DP.
liqa::OptResult reference_opt(const liqa::Instance& inst, long grid) {
  if (liqa::all_linear(inst)) return liqa::opt_linear_greedy(inst);
  return liqa::opt_dp(inst, grid);
}

void flush_rows(std::vector<liqa::ReportRow>& rows, const std::string& out_path) {
  if (out_path.empty() || rows.empty()) return;
  std::sort(rows.begin(), rows.end(), [](const liqa::ReportRow& a, const liqa::ReportRow& b) {
    if (a.instance_id != b.instance_id) return a.instance_id < b.instance_id;
    return a.mechanism < b.mechanism;
  });
  liqa::write_csv_file(rows, out_path);
  log_line(LogLevel::info, "wrote " + std::to_string(rows.size()) + " rows to " + out_path);
}

void print_outcome_table(const liqa::Instance& inst, const liqa::Outcome& out) {
  std::printf("agent  x  p\n");
  for (std::size_t i = 0; i < inst.size(); ++i)
    std::printf("%zu  %.10g  %.10g\n", i, out.allocations[i], out.payments[i]);
}

int violations_of(const liqa::OutcomeCheck& c) {
  return (c.supply_ok ? 0 : 1) + (c.budget_ok ? 0 : 1) + (c.nonneg_ok ? 0 : 1);
}

struct CommonArgs {
  std::string instance_path;
  std::string out_path;
  std::uint64_t seed = 1;
  int trials = 1;
  long grid = 1000;
  bool grid_given = false;
  liqa::PrivateParams params;
};

int cmd_opt(const CommonArgs& args) {
  auto inst = liqa::load_instance(args.instance_path);
  liqa::OptResult r;
  if (liqa::all_linear(inst) && !args.grid_given) {
    r = liqa::opt_linear_greedy(inst);
    std::printf("method: greedy-linear\n");
  } else {
    r = liqa::opt_dp(inst, args.grid);
    std::printf("method: dp-grid m=%ld %s\n", r.grid_resolution,
                r.grid_exact ? "exact" : "approximate");
  }
  std::printf("opt: %.17g\nallocation:", r.value);
  for (double x : r.allocation) std::printf(" %.10g", x);
  std::printf("\n");
  return 0;
}

int cmd_run_public(const CommonArgs& args) {
  auto inst = liqa::load_instance(args.instance_path);
  const auto start = Clock::now();
  auto alloc = liqa::allocate_public(inst);
  auto out = liqa::pay_public(inst);
  const double ms = ms_since(start);

  const double opt = liqa::opt_linear_greedy(inst).value;
  const auto check = liqa::check_outcome(inst, out);
  std::printf("mechanism: public\n");
  std::printf("k: %d  case: %s  p0: %.10g\n", alloc.regime.k,
              alloc.regime.alloc_case == liqa::AllocationCase::case_i ? "I" : "II",
              alloc.regime.p0);
  print_outcome_table(inst, out);
  const double w = liqa::welfare(inst, out);
  std::printf("welfare: %.17g\nrevenue: %.17g\nopt: %.17g\nratio: %.10g\nviolations: %d\n", w,
              liqa::revenue(out), opt, liqa::welfare_ratio(opt, w), violations_of(check));

  std::vector<liqa::ReportRow> rows{liqa::make_report_row(
      instance_stem(args.instance_path), "public", inst, out, opt, violations_of(check), ms)};
  flush_rows(rows, args.out_path);
  return check.ok() ? 0 : 1;
}

int cmd_run_private(const CommonArgs& args) {
  auto inst = liqa::load_instance(args.instance_path);
  liqa::validate_params(args.params);
  const double opt = reference_opt(inst, args.grid).value;
  std::vector<liqa::ReportRow> rows;
  bool ok = true;
  for (int t = 0; t < args.trials; ++t) {
    const auto start = Clock::now();
    const auto rnd = liqa::draw_randomness(args.params, inst.size(), args.seed + t);
    const auto out = liqa::run_with_randomness(inst, args.params, rnd);
    const double ms = ms_since(start);
    const auto check = liqa::check_outcome(inst, out);
    ok = ok && check.ok();

    const char* branch = rnd.branch == liqa::Branch::mv1   ? "mv1"
                         : rnd.branch == liqa::Branch::mv2 ? "mv2"
                                                           : "rs";
    std::printf("trial %d  seed %llu  branch %s\n", t,
                static_cast<unsigned long long>(args.seed + t), branch);
    print_outcome_table(inst, out);
    const double w = liqa::welfare(inst, out);
    std::printf("welfare: %.17g  revenue: %.17g  opt: %.17g\n", w, liqa::revenue(out), opt);
    rows.push_back(liqa::make_report_row(instance_stem(args.instance_path) + "#" + padded_index(t),
                                         "private", inst, out, opt, violations_of(check), ms));
  }
  flush_rows(rows, args.out_path);
  return ok ? 0 : 1;
}

int cmd_expect(const CommonArgs& args) {
  auto inst = liqa::load_instance(args.instance_path);
  liqa::validate_params(args.params);
  const auto start = Clock::now();
  const auto ev = liqa::exact_expectation(inst, args.params);
  const double ms = ms_since(start);
  const auto opt = reference_opt(inst, args.grid);
  std::printf("ev_mv1: %.17g\nev_mv2: %.17g\nev_rs: %.17g\ntotal: %.17g\n", ev.ev_mv1, ev.ev_mv2,
              ev.ev_rs, ev.total);
  std::printf("opt: %.17g (%s)\nratio: %.10g\n", opt.value,
              opt.method == liqa::OptResult::Method::greedy_linear
                  ? "greedy-linear"
                  : (opt.grid_exact ? "dp exact" : "dp approximate"),
              liqa::welfare_ratio(opt.value, ev.total));

  const bool opt_exact =
      opt.method == liqa::OptResult::Method::greedy_linear || opt.grid_exact;
  bool bound_ok = true;
  if (opt_exact) {
    bound_ok = ev.total >= opt.value / 34.0 - 1e-9;
    std::printf("bound34: %s\n", bound_ok ? "ok" : "violated");
  } else {
    std::printf("bound34: not checked (approximate opt)\n");
  }
  if (!args.out_path.empty()) {
    liqa::Outcome dummy = liqa::Outcome::zeros(inst.size());
    (void)dummy;
    std::vector<liqa::ReportRow> rows;
    liqa::ReportRow r;
    r.instance_id = instance_stem(args.instance_path);
    r.mechanism = "private-expect";
    r.welfare = ev.total;
    r.revenue = 0.0;
    r.opt = opt.value;
    r.ratio = liqa::welfare_ratio(opt.value, ev.total);
    r.violations = bound_ok ? 0 : 1;
    r.ms = ms;
    rows.push_back(r);
    flush_rows(rows, args.out_path);
  }
  return bound_ok ? 0 : 1;
}

struct AuditArgs {
  std::string mech = "public";
  int n_max = 6;
  int draws = 4;
};

/// The two-agent profile on which plain Vickrey over capped values is
/// exploitable by inflating the budget.
liqa::Instance vickrey_counterexample_instance() {
  liqa::Instance inst;
  inst.regime = liqa::Regime::private_budget;
  inst.agents = {{1.0, liqa::ValuationCurve::make_linear(2.0)},
                 {1.0, liqa::ValuationCurve::make_linear(2.0)}};
  return inst;
}

int cmd_audit(const CommonArgs& args, const AuditArgs& audit_args) {
  liqa::validate_params(args.params);
  liqa::AuditOptions opts;
  // default misreport ladder {0.05, 0.10, ..., 3.0} plus random perturbations
  opts.grid = static_cast<int>(std::max<long>(2, args.grid_given ? args.grid : 60));
  std::mt19937_64 meta(args.seed);

  liqa::Instance fixed_instance;
  bool use_fixed = false;
  if (!args.instance_path.empty()) {
    fixed_instance = liqa::load_instance(args.instance_path);
    use_fixed = true;
  }

  std::vector<liqa::ReportRow> rows;
  long total_violations = 0;
  for (int t = 0; t < args.trials; ++t) {
    const auto start = Clock::now();
    liqa::Instance inst;
    if (use_fixed) {
      inst = fixed_instance;
    } else if (audit_args.mech == "vickrey" && t == 0) {
      inst = vickrey_counterexample_instance();
    } else {
      const bool wants_private_curves = audit_args.mech != "public";
      liqa::GeneratorSpec spec;
      spec.n = 1 + static_cast<int>(liqa::detail::uniform_below(meta, audit_args.n_max));
      spec.regime =
          wants_private_curves ? liqa::Regime::private_budget : liqa::Regime::public_budget;
      if (wants_private_curves && liqa::detail::coin_flip(meta)) {
        spec.kind = liqa::GeneratorSpec::Kind::pwl;
        spec.align = 16;
        spec.pwl_breakpoints = 3;
        spec.budget_at_breakpoint = true;
      }
      inst = liqa::generate_instance(spec, meta());
    }
    opts.seed = meta();

    liqa::AuditReport report;
    liqa::Outcome shown;
    if (audit_args.mech == "public") {
      report = liqa::audit_public(inst, opts);
      shown = liqa::pay_public(inst);
    } else if (audit_args.mech == "vickrey") {
      report = liqa::audit_vickrey_plain(inst, opts);
      shown = liqa::run_vickrey_plain(inst);
    } else if (audit_args.mech == "mv1") {
      report = liqa::audit_mechanism(
          inst, [&](const liqa::Instance& x) { return liqa::run_mv1(x, args.params); }, true,
          opts);
      shown = liqa::run_mv1(inst, args.params);
    } else if (audit_args.mech == "mv2" || audit_args.mech == "rs" ||
               audit_args.mech == "private") {
      for (int d = 0; d < audit_args.draws; ++d) {
        auto rnd = liqa::draw_randomness(args.params, inst.size(), meta());
        if (audit_args.mech == "mv2") rnd.branch = liqa::Branch::mv2;
        if (audit_args.mech == "rs") rnd.branch = liqa::Branch::rs;
        if (rnd.branch != liqa::Branch::mv1 && rnd.in_s.size() != inst.size()) {
          rnd.in_s.resize(inst.size());
          for (std::size_t i = 0; i < inst.size(); ++i)
            rnd.in_s[i] = liqa::detail::coin_flip(meta);
        }
        auto part = liqa::audit_private_fixed(inst, args.params, rnd, opts);
        report.violations.insert(report.violations.end(), part.violations.begin(),
                                 part.violations.end());
        report.supply_violation |= part.supply_violation;
        report.budget_violation |= part.budget_violation;
        report.nonneg_violation |= part.nonneg_violation;
        report.runs += part.runs;
        if (d == 0) shown = liqa::run_with_randomness(inst, args.params, rnd);
      }
    } else {
      std::cerr << "unknown mechanism: " << audit_args.mech << '\n';
      return 2;
    }
    const double ms = ms_since(start);

    total_violations += report.total_violations();
    const double opt = reference_opt(inst, 128).value;
    const std::string id = use_fixed ? instance_stem(args.instance_path) + "#" + padded_index(t)
                           : (audit_args.mech == "vickrey" && t == 0) ? "fixture-vickrey"
                                                                      : "gen-" + padded_index(t);
    rows.push_back(
        liqa::make_report_row(id, audit_args.mech, inst, shown, opt, report.total_violations(), ms));
    log_line(LogLevel::debug, "trial " + std::to_string(t) + " violations " +
                                  std::to_string(report.total_violations()));
  }
  flush_rows(rows, args.out_path);
  std::printf("trials: %d\nviolations: %ld\n", args.trials, total_violations);
  return total_violations > 0 ? 1 : 0;
}

struct GenerateArgs {
  int n = 2;
  int pwl = 0;
  int align = 0;
  bool private_regime = false;
  bool budget_at_kink = false;
};

int cmd_generate(const CommonArgs& args, const GenerateArgs& gen) {
  liqa::GeneratorSpec spec;
  spec.n = gen.n;
  if (gen.pwl > 0) {
    spec.kind = liqa::GeneratorSpec::Kind::pwl;
    spec.pwl_breakpoints = gen.pwl;
    spec.align = gen.align;
    spec.budget_at_breakpoint = gen.budget_at_kink;
    spec.regime = liqa::Regime::private_budget;
  } else {
    spec.regime = gen.private_regime ? liqa::Regime::private_budget : liqa::Regime::public_budget;
  }
  auto inst = liqa::generate_instance(spec, args.seed);
  if (args.out_path.empty()) {
    std::cout << liqa::instance_to_json(inst).dump(2) << '\n';
  } else {
    liqa::save_instance(inst, args.out_path);
    log_line(LogLevel::info, "wrote instance to " + args.out_path);
  }
  return 0;
}

struct Example1Args {
  double eps = 1e-6;
  std::string save_path;
};

int cmd_example1(const CommonArgs& args, const Example1Args& ex) {
  if (!(ex.eps > 0.0 && ex.eps < 1.0)) {
    std::cerr << "eps must lie in (0, 1)\n";
    return 2;
  }
  liqa::Instance inst;
  inst.regime = liqa::Regime::public_budget;
  inst.agents = {{ex.eps, liqa::ValuationCurve::make_linear(1.0)},
                 {1.0 - ex.eps, liqa::ValuationCurve::make_linear(1.0 / liqa::kGoldenRatio)}};
  if (!ex.save_path.empty()) liqa::save_instance(inst, ex.save_path);

  const auto start = Clock::now();
  auto out = liqa::pay_public(inst);
  const double ms = ms_since(start);
  const double opt = liqa::opt_linear_greedy(inst).value;
  const double w = liqa::welfare(inst, out);
  const double ratio = liqa::welfare_ratio(opt, w);
  print_outcome_table(inst, out);
  std::printf("welfare: %.17g\nopt: %.17g\nratio: %.17g\nphi: %.17g\n|ratio - phi|: %.3e\n", w,
              opt, ratio, liqa::kGoldenRatio, std::abs(ratio - liqa::kGoldenRatio));

  if (!args.out_path.empty()) {
    std::vector<liqa::ReportRow> rows{liqa::make_report_row(
        "example1", "public", inst, out, opt,
        violations_of(liqa::check_outcome(inst, out)), ms)};
    flush_rows(rows, args.out_path);
  }
  return std::abs(ratio - liqa::kGoldenRatio) <= 1e-4 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"liqa: truthful budget-feasible auctions for one unit of divisible good"};
  app.require_subcommand(1);

  CommonArgs args;
  AuditArgs audit_args;
  GenerateArgs gen_args;
  Example1Args ex_args;

  auto add_common = [&](CLI::App* c, bool needs_instance) {
    if (needs_instance)
      c->add_option("--instance", args.instance_path, "instance JSON file")->required();
    c->add_option("--seed", args.seed, "random seed");
    c->add_option("--trials", args.trials, "number of runs/instances")
        ->check(CLI::PositiveNumber);
    c->add_option("--grid", args.grid, "grid resolution / deviation grid")
        ->check(CLI::PositiveNumber);
    c->add_option("--out", args.out_path, "CSV output path");
    c->add_option("--beta", args.params.beta, "sampling price fraction");
    c->add_option("--gamma", args.params.gamma, "Vickrey price gap");
    c->add_option("--mu", args.params.mu, "modified-Vickrey probability mass");
  };

  auto* opt_cmd = app.add_subcommand("opt", "optimal liquid welfare of an instance");
  add_common(opt_cmd, true);

  auto* pub_cmd = app.add_subcommand("run-public", "run the golden-ratio public-budget auction");
  add_common(pub_cmd, true);

  auto* priv_cmd = app.add_subcommand("run-private", "run the private-budget auction");
  add_common(priv_cmd, true);

  auto* expect_cmd =
      app.add_subcommand("expect", "exact expected welfare of the private auction");
  add_common(expect_cmd, true);

  auto* audit_cmd = app.add_subcommand("audit", "deviation and invariant audits");
  add_common(audit_cmd, false);
  audit_cmd->add_option("--instance", args.instance_path,
                        "audit this instance instead of generated ones");
  audit_cmd->add_option("--mech", audit_args.mech, "public|private|mv1|mv2|rs|vickrey");
  audit_cmd->add_option("--n", audit_args.n_max, "max agents per generated instance")
      ->check(CLI::PositiveNumber);
  audit_cmd->add_option("--draws", audit_args.draws, "randomness draws per instance")
      ->check(CLI::PositiveNumber);

  auto* gen_cmd = app.add_subcommand("generate", "write a random instance");
  add_common(gen_cmd, false);
  gen_cmd->add_option("--n", gen_args.n, "number of agents")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--pwl", gen_args.pwl, "interior pwl breakpoints (0 = linear)");
  gen_cmd->add_option("--align", gen_args.align, "snap pwl breakpoints to multiples of 1/align");
  gen_cmd->add_flag("--private", gen_args.private_regime, "private-budget regime");
  gen_cmd->add_flag("--budget-at-kink", gen_args.budget_at_kink,
                    "pin pwl budgets to curve values at breakpoints");

  auto* ex_cmd = app.add_subcommand("example1", "tightness instance of the public auction");
  add_common(ex_cmd, false);
  ex_cmd->add_option("--eps", ex_args.eps, "budget of the high-rate agent");
  ex_cmd->add_option("--save", ex_args.save_path, "also write the instance JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (opt_cmd->parsed()) {
      args.grid_given = opt_cmd->count("--grid") > 0;
      return cmd_opt(args);
    }
    if (audit_cmd->parsed()) args.grid_given = audit_cmd->count("--grid") > 0;
    if (pub_cmd->parsed()) return cmd_run_public(args);
    if (priv_cmd->parsed()) return cmd_run_private(args);
    if (expect_cmd->parsed()) return cmd_expect(args);
    if (audit_cmd->parsed()) return cmd_audit(args, audit_args);
    if (gen_cmd->parsed()) return cmd_generate(args, gen_args);
    if (ex_cmd->parsed()) return cmd_example1(args, ex_args);
  } catch (const liqa::InstanceFormatError& e) {
    std::cerr << "instance error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
