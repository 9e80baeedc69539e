#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "circpolicy/oracle.hpp"
#include "circpolicy/report.hpp"
#include "circpolicy/scenario_io.hpp"

#ifndef CIRCPOLICY_DEFAULT_SCENARIO
#define CIRCPOLICY_DEFAULT_SCENARIO "data/coffee_case.scenario"
#endif

namespace circpolicy::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
      throw PreconditionViolated("not a number in grid '" + text + "': '" + s + "'");
    }
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) {
      parts.push_back(p);
    }
    if (parts.size() != 3) {
      throw PreconditionViolated("range grid must be lo:hi:step, got '" + text + "'");
    }
    const double lo = number(parts[0]), hi = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || hi < lo) {
      throw PreconditionViolated("range grid needs lo <= hi and step > 0, got '" + text + "'");
    }
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (count > 100000) {
      throw PreconditionViolated("range grid '" + text + "' has too many points");
    }
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(lo + step * static_cast<double>(i));
    }
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) {
      out.push_back(number(p));
    }
  }
  if (out.empty()) {
    throw PreconditionViolated("grid '" + text + "' is empty");
  }
  return out;
}

namespace {

std::vector<Money> to_money(const std::vector<double>& values) {
  std::vector<Money> out;
  out.reserve(values.size());
  for (double v : values) {
    out.push_back(Money::from_double(v));
  }
  return out;
}

void remove_marker(const fs::path& marker) {
  std::error_code ec;
  fs::remove(marker, ec);
}

ordered_json outcome_json(const Scenario& scenario, UpperObjective objective, Money budget,
                          const BilevelOutcome& o) {
  ordered_json j;
  j["objective"] = to_string(objective);
  j["budget"] = budget.to_string(6);
  j["feasible"] = o.feasible;
  j["tax_rate"] = format_decimal(o.best_policy.tax_rate);
  ordered_json subs = ordered_json::object();
  for (const auto& r : scenario.routes()) {
    if (r.subsidizable) {
      subs[r.route_id] = o.best_policy.subsidy(r.route_id).to_string(6);
    }
  }
  j["subsidy_rates"] = std::move(subs);
  j["upper_value"] = format_decimal(o.upper_value);
  j["emissions"] = format_decimal(o.response.total_emissions);
  j["circularity"] = format_decimal(o.response.circularity_index);
  j["industry_cost"] = o.response.industry_cost.to_string(6);
  j["tax_income"] = o.response.tax_payment.to_string(6);
  j["subsidy_outlay"] = o.response.subsidy_outlay.to_string(6);
  j["units"] = o.response.allocation.units();
  j["evaluations"] = o.evaluations;
  return j;
}

int command_run(const RunConfig& c, std::ostream& out) {
  const Scenario scenario = load_scenario(c.scenario);
  const auto o = optimize(scenario, c.objective, c.budget, c.pso);
  const std::string stem = c.name.empty() ? "run" : c.name;
  write_file_atomic(c.output_dir / (stem + ".csv"), outcome_csv(scenario, c.objective, c.budget, o));
  write_file_atomic(c.output_dir / (stem + "_trace.csv"), trace_csv(o.trace));
  out << outcome_json(scenario, c.objective, c.budget, o).dump() << "\n";
  return kOk;
}

std::string objective_axis(UpperObjective objective) {
  switch (objective) {
    case UpperObjective::MinGhg:
      return "GHG emissions (kg-CO2e)";
    case UpperObjective::MaxCircularity:
      return "Circularity index";
    case UpperObjective::MostProfitable:
      return "Industry cost ($)";
  }
  return "";
}

int command_sweep(const RunConfig& c, std::ostream& out) {
  const Scenario scenario = load_scenario(c.scenario);
  const std::string stem = c.name.empty() ? "sweep" : c.name;
  const fs::path marker = c.output_dir / (stem + ".complete");
  remove_marker(marker);

  const auto records = budget_sweep(scenario, c.objective, c.budgets, c.mode, c.pso);
  write_file_atomic(c.output_dir / (stem + ".csv"), sweep_csv(scenario, records));
  std::size_t failed = 0;
  for (const auto& r : records) {
    failed += r.error.has_value();
  }

  if (c.emit_svg) {
    Series value{to_string(c.objective), {}, {}};
    Series income{"tax income", {}, {}}, outlay{"subsidy outlay", {}, {}}, tax{"tax rate", {}, {}};
    for (const auto& r : records) {
      if (r.error) {
        continue;
      }
      const double b = r.budget.to_double();
      value.x.push_back(b);
      value.y.push_back(r.upper_value);
      income.x.push_back(b);
      income.y.push_back(r.tax_income.to_double());
      outlay.x.push_back(b);
      outlay.y.push_back(r.subsidy_outlay.to_double());
      tax.x.push_back(b);
      tax.y.push_back(r.tax_rate);
    }
    const std::string title = "Government budget vs " + objective_axis(c.objective) + " (" +
                              to_string(c.mode) + ")";
    write_file_atomic(c.output_dir / (stem + ".svg"),
                      svg_line_chart(title, "Government budget ($)", objective_axis(c.objective),
                                     {value}));
    write_file_atomic(c.output_dir / (stem + "_revenue.svg"),
                      svg_line_chart("Carbon tax revenue and subsidies", "Government budget ($)",
                                     "Amount ($)", {income, outlay}));
    write_file_atomic(c.output_dir / (stem + "_tax.svg"),
                      svg_line_chart("Carbon tax rate", "Government budget ($)",
                                     "Tax rate ($/kg-CO2e)", {tax}));
  }

  out << "wrote " << (c.output_dir / (stem + ".csv")).string() << " (" << records.size()
      << " budgets, " << failed << " failed)\n";
  if (failed > 0) {
    return kSolver;
  }
  write_file_atomic(marker, std::to_string(records.size()) + "\n");
  return kOk;
}

int command_sensitivity(const RunConfig& c, std::ostream& out) {
  const Scenario scenario = load_scenario(c.scenario);
  std::vector<double> values = c.values;
  if (values.empty()) {
    values = c.parameter == "distance" ? std::vector<double>{7, 15, 65, 140}
                                       : std::vector<double>{0.01, 0.0313, 0.10};
  }
  const std::string stem = c.name.empty() ? "sensitivity_" + c.parameter : c.name;
  const fs::path marker = c.output_dir / (stem + ".complete");
  remove_marker(marker);

  std::vector<SensitivityLevel> levels;
  if (c.parameter == "distance") {
    levels = sensitivity_distance(scenario, c.objective, values, c.budgets, c.pso, c.mode);
  } else if (c.parameter == "loss") {
    levels = sensitivity_loss(scenario, c.objective, values, c.budgets, c.pso, c.mode);
  } else {
    throw PreconditionViolated("unknown sensitivity parameter '" + c.parameter +
                               "' (expected distance or loss)");
  }
  write_file_atomic(c.output_dir / (stem + ".csv"), sensitivity_csv(scenario, c.parameter, levels));
  write_file_atomic(c.output_dir / (stem + "_summary.csv"),
                    sensitivity_summary_csv(c.parameter, levels));

  std::size_t failed = 0;
  std::vector<Series> income, value;
  for (const auto& l : levels) {
    const std::string label = c.parameter + " " + format_decimal(l.parameter) + " " + l.pathway;
    Series si{label, {}, {}}, sv{label, {}, {}};
    for (const auto& r : l.records) {
      failed += r.error.has_value();
      if (r.error) {
        continue;
      }
      si.x.push_back(r.budget.to_double());
      si.y.push_back(r.tax_income.to_double());
      sv.x.push_back(r.budget.to_double());
      sv.y.push_back(r.upper_value);
    }
    income.push_back(std::move(si));
    value.push_back(std::move(sv));
    out << c.parameter << " " << format_decimal(l.parameter) << ": " << l.pathway << "\n";
  }
  if (c.emit_svg) {
    write_file_atomic(c.output_dir / (stem + "_revenue.svg"),
                      svg_line_chart("Carbon tax revenue by " + c.parameter,
                                     "Government budget ($)", "Tax income ($)", income));
    write_file_atomic(c.output_dir / (stem + ".svg"),
                      svg_line_chart(objective_axis(c.objective) + " by " + c.parameter,
                                     "Government budget ($)", objective_axis(c.objective), value));
  }
  if (failed > 0) {
    return kSolver;
  }
  write_file_atomic(marker, std::to_string(levels.size()) + "\n");
  return kOk;
}

struct CheckTally {
  std::string name;
  std::size_t instances = 0;
  std::size_t mismatches = 0;
  std::string detail;
};

/// Coefficients on decimal grids coarse enough that distinct follower totals
/// differ by more than the branch-and-bound gap.
Scenario random_scenario(std::mt19937_64& rng, std::int64_t max_demand, bool general) {
  auto pick = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  ScenarioSpec spec;
  spec.name = "random";
  spec.demand = pick(1, max_demand);
  const auto routes = static_cast<std::size_t>(pick(2, general ? 4 : 6));
  for (std::size_t i = 0; i < routes; ++i) {
    RouteSpec r;
    r.route_id = "r" + std::to_string(i);
    r.product_id = "p" + std::to_string(pick(0, 1));
    r.technology_id = general ? "t" + std::to_string(pick(0, 2)) : "t" + std::to_string(i);
    r.unit_cost = Money::from_ticks(pick(-5000, 10000) * 10'000);
    r.unit_emissions = static_cast<double>(pick(0, 2000)) * 1e-4;
    r.unit_circularity = static_cast<double>(pick(0, 200)) * 0.01;
    r.subsidizable = pick(0, 1) == 1;
    spec.routes.push_back(std::move(r));
  }
  if (general) {
    for (int t = 0; t < 3; ++t) {
      spec.technology_fixed_costs["t" + std::to_string(t)] = Money::from_ticks(pick(0, 50) * 1'000'000);
    }
    std::int64_t total = 0;
    for (const auto& r : spec.routes) {
      const auto cap = pick(0, spec.demand);
      spec.capacity_limits[r.route_id] = cap;
      total += cap;
    }
    if (total < spec.demand) {
      spec.capacity_limits.erase(spec.routes.front().route_id);
    }
  }
  return Scenario(std::move(spec));
}

PolicyVector random_policy(std::mt19937_64& rng, const Scenario& scenario) {
  auto pick = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  PolicyVector p;
  p.tax_rate = static_cast<double>(pick(0, 50)) * 0.1;
  for (const auto& r : scenario.routes()) {
    if (r.subsidizable && pick(0, 1) == 1) {
      p.subsidy_rates[r.route_id] = Money::from_ticks(pick(0, 10000) * 10'000);
    }
  }
  return p;
}

void compare_lower(const Scenario& s, const PolicyVector& p, bool with_greedy, CheckTally& tally) {
  ++tally.instances;
  const auto enumerated = enumerate_lower(s, p);
  const auto milp = solve_lower_milp(s, p);
  bool ok = milp.industry_cost == enumerated.optimum;
  std::string greedy_text;
  if (with_greedy) {
    const auto g = solve_lower_greedy(s, p);
    ok = ok && g.objective == enumerated.optimum;
    greedy_text = " greedy " + g.objective.to_string(9);
  }
  if (!ok) {
    ++tally.mismatches;
    if (tally.detail.empty()) {
      tally.detail = "enumeration " + enumerated.optimum.to_string(9) + " milp " +
                     milp.industry_cost.to_string(9) + greedy_text;
    }
  }
}

int command_verify(const RunConfig& c, std::ostream& out) {
  const Scenario full = load_scenario(c.scenario);
  const std::int64_t n = c.verify_demand;
  if (n < 1) {
    throw PreconditionViolated("verify demand must be at least 1");
  }

  // Bundled scenario rescaled to the small demand.
  ScenarioSpec small_spec = full.spec();
  small_spec.demand = n;
  const Scenario small(std::move(small_spec));
  std::vector<CheckTally> checks;

  CheckTally scaled{"bundled scenario at demand " + std::to_string(n) + ": greedy = milp = enumeration", 0, 0, {}};
  for (int ti = 0; ti <= 10; ++ti) {
    for (int si = 0; si <= 10; ++si) {
      PolicyVector p;
      p.tax_rate = 0.5 * ti;
      if (si > 0) {
        p.subsidy_rates["landfill"] = Money::from_ticks(si * 10'000'000);
      }
      compare_lower(small, p, true, scaled);
    }
  }
  compare_lower(small, PolicyVector{tax_threshold(small, "strap", "landfill"), {}}, true, scaled);
  checks.push_back(std::move(scaled));

  std::mt19937_64 rng(c.pso.seed);
  CheckTally linear{"random pure-linear scenarios: greedy = milp = enumeration", 0, 0, {}};
  for (std::size_t i = 0; i < c.verify_cases; ++i) {
    const Scenario s = random_scenario(rng, n, false);
    compare_lower(s, random_policy(rng, s), true, linear);
  }
  checks.push_back(std::move(linear));

  CheckTally general{"random scenarios with capacities and fixed costs: milp = enumeration", 0, 0, {}};
  for (std::size_t i = 0; i < std::max<std::size_t>(1, c.verify_cases / 5); ++i) {
    const Scenario s = random_scenario(rng, n, true);
    compare_lower(s, random_policy(rng, s), false, general);
  }
  checks.push_back(std::move(general));

  CheckTally search{"swarm within 1% of grid oracle (budget 0, min-ghg)", 0, 0, {}};
  {
    GridSpec grid;
    grid.tax = {0.0, 2.0, 201};
    grid.subsidies["landfill"] = {0.0, 0.1, 201};
    const auto oracle = grid_bilevel(full, UpperObjective::MinGhg, grid);
    const auto swarm = optimize(full, UpperObjective::MinGhg, Money{}, c.pso);
    ++search.instances;
    const double gap = std::abs(swarm.upper_value - oracle.evaluation.upper_value);
    if (!swarm.feasible || gap > 0.01 * std::abs(oracle.evaluation.upper_value) ||
        swarm.upper_value > oracle.evaluation.upper_value + 1e-9) {
      ++search.mismatches;
      search.detail = "swarm " + format_decimal(swarm.upper_value) + " grid " +
                      format_decimal(oracle.evaluation.upper_value);
    }
  }
  checks.push_back(std::move(search));

  std::string csv = "check,instances,mismatches,status\n";
  std::size_t bad = 0;
  for (const auto& t : checks) {
    const bool ok = t.mismatches == 0;
    bad += !ok;
    csv += "\"" + t.name + "\"," + std::to_string(t.instances) + "," +
           std::to_string(t.mismatches) + "," + (ok ? "ok" : "mismatch") + "\n";
    out << (ok ? "ok       " : "MISMATCH ") << t.name << " (" << t.instances << " instances)";
    if (!ok) {
      out << ": " << t.detail;
    }
    out << "\n";
  }
  write_file_atomic(c.output_dir / (c.name.empty() ? "verify.csv" : c.name + ".csv"), csv);
  return bad == 0 ? kOk : kMismatch;
}

int command_calibrate(const RunConfig& c, std::ostream& out) {
  const Scenario scenario = calibrate_case_study();
  const fs::path target =
      c.calibrate_output.empty() ? c.output_dir / "coffee_case.scenario" : c.calibrate_output;
  save_scenario(scenario, target);
  out << "wrote " << target.string() << "\n";
  out << "anchor,residual\n";
  for (const auto& [name, residual] : anchor_residuals(scenario)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", std::abs(residual) < 1e-12 ? 0.0 : residual);
    out << name << "," << buf << "\n";
  }
  return kOk;
}

ordered_json error_record(const std::string& kind, const std::string& message) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  return j;
}

}  // namespace

int run_command(const RunConfig& c, std::ostream& out) {
  c.pso.check();
  if (c.command == "run") {
    return command_run(c, out);
  }
  if (c.command == "sweep") {
    return command_sweep(c, out);
  }
  if (c.command == "sensitivity") {
    return command_sensitivity(c, out);
  }
  if (c.command == "verify") {
    return command_verify(c, out);
  }
  if (c.command == "calibrate") {
    return command_calibrate(c, out);
  }
  throw PreconditionViolated("unknown command '" + c.command + "'");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Carbon tax and subsidy design for packaging supply chains"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string scenario = CIRCPOLICY_DEFAULT_SCENARIO;
  std::string output_dir;
  if (const char* env = std::getenv("CIRCPOLICY_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    output_dir = env;
  } else {
    output_dir = "circpolicy-out";
  }
  std::string objective = "min-ghg";
  std::string mode = "combined";
  std::string budgets = "0:100:10";
  std::string values;
  double budget = 0.0;
  std::optional<double> max_tax, max_subsidy;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario, "Scenario file (JSON)");
    sub->add_option("--output-dir", output_dir,
                    "Output directory (default: $CIRCPOLICY_OUTPUT_DIR or circpolicy-out)");
    sub->add_option("--name", cfg.name, "Output file stem");
  };
  auto search = [&](CLI::App* sub) {
    sub->add_option("--objective", objective, "min-ghg, max-circularity or most-profitable");
    sub->add_option("--seed", cfg.pso.seed, "Swarm seed");
    sub->add_option("--swarm", cfg.pso.swarm_size, "Swarm size");
    sub->add_option("--iterations", cfg.pso.iterations, "Iterations per restart");
    sub->add_option("--restarts", cfg.pso.restarts, "Independent restarts");
    sub->add_option("--max-tax", max_tax, "Upper bound on the tax rate ($/kg-CO2e)");
    sub->add_option("--max-subsidy", max_subsidy, "Upper bound on subsidy rates ($/unit)");
  };

  auto* run = app.add_subcommand("run", "Optimize the policy for one budget");
  common(run);
  search(run);
  run->add_option("--budget", budget, "Government budget ($)");

  auto* sweep = app.add_subcommand("sweep", "Optimize across a budget grid");
  common(sweep);
  search(sweep);
  sweep->add_option("--budgets", budgets, "lo:hi:step or comma list (use --budgets=-60:100:10)");
  sweep->add_option("--mode", mode, "subsidy-only, tax-only or combined");
  sweep->add_flag("--svg", cfg.emit_svg, "Also write SVG charts");

  auto* sens = app.add_subcommand("sensitivity", "Budget sweeps across washing distance or glass loss");
  common(sens);
  search(sens);
  sens->add_option("--parameter", cfg.parameter, "distance or loss");
  sens->add_option("--values", values, "Parameter values (default 7,15,65,140 or 0.01,0.0313,0.1)");
  sens->add_option("--budgets", budgets, "lo:hi:step or comma list");
  sens->add_option("--mode", mode, "subsidy-only, tax-only or combined");
  sens->add_flag("--svg", cfg.emit_svg, "Also write SVG charts");

  auto* verify = app.add_subcommand("verify", "Cross-check solvers against the exhaustive oracles");
  common(verify);
  verify->add_option("--demand", cfg.verify_demand, "Demand for the small instances");
  verify->add_option("--cases", cfg.verify_cases, "Random instances");
  verify->add_option("--seed", cfg.pso.seed, "Seed for instances and the swarm");

  auto* calibrate = app.add_subcommand("calibrate", "Regenerate the bundled case-study scenario");
  calibrate->add_option("--output-dir", output_dir, "Output directory");
  calibrate->add_option("--output", cfg.calibrate_output, "Scenario file to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << error_record("usage", e.what()).dump() << "\n";
    return kValidation;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.scenario = scenario;
    cfg.output_dir = output_dir;
    cfg.objective = parse_objective(objective);
    cfg.mode = parse_mode(mode);
    cfg.budget = Money::from_double(budget);
    cfg.budgets = to_money(parse_grid(budgets));
    if (!values.empty()) {
      cfg.values = parse_grid(values);
    }
    if (max_tax || max_subsidy) {
      const Scenario s = load_scenario(cfg.scenario);
      cfg.pso.bounds = PolicySpace::default_bounds(s);
      if (max_tax) {
        cfg.pso.bounds[0].hi = *max_tax;
      }
      for (std::size_t i = 1; max_subsidy && i < cfg.pso.bounds.size(); ++i) {
        cfg.pso.bounds[i].hi = *max_subsidy;
      }
    }
    return run_command(cfg, out);
  } catch (const ParseError& e) {
    auto j = error_record("parse", e.what());
    j["line"] = e.line();
    j["column"] = e.column();
    err << j.dump() << "\n";
    return kValidation;
  } catch (const ValidationError& e) {
    auto j = error_record(dynamic_cast<const CalibrationError*>(&e) ? "calibration" : "validation",
                          "invalid input");
    j["issues"] = e.issues();
    err << j.dump() << "\n";
    return kValidation;
  } catch (const PreconditionViolated& e) {
    err << error_record("precondition", e.what()).dump() << "\n";
    return kValidation;
  } catch (const InvalidPolicy& e) {
    err << error_record("invalid-policy", e.what()).dump() << "\n";
    return kValidation;
  } catch (const InvalidAllocation& e) {
    err << error_record("invalid-allocation", e.what()).dump() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << error_record("solver", e.what()).dump() << "\n";
    return kSolver;
  }
}

}  // namespace circpolicy::cli
