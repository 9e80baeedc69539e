// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "circpolicy/analysis.hpp"
#include "circpolicy/oracle.hpp"
#include "circpolicy/scenario_io.hpp"
#include "cli.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace circpolicy;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

class Checker {
public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      v_.pass = false;
      if (!v_.detail.empty()) {
        v_.detail += "; ";
      }
      v_.detail += what;
    }
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : ", ") + s; }
  Verdict done() {
    if (v_.pass) {
      v_.detail = notes_;
    }
    return v_;
  }

private:
  Verdict v_;
  std::string notes_;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

bool within_rel(double x, double ref, double rel) { return std::abs(x - ref) <= rel * std::abs(ref); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Money> money_grid(double lo, double hi, double step) {
  std::vector<Money> out;
  for (double b = lo; b <= hi + 1e-9; b += step) {
    out.push_back(Money::from_double(b));
  }
  return out;
}

const Scenario& bundled() {
  static const Scenario s =
      load_scenario(fs::path(CIRCPOLICY_DATA_DIR) / "coffee_case.scenario");
  return s;
}

Verdict criterion1() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  const double t = tax_threshold(bundled(), kStrapRoute, kLandfillRoute);
  const double elapsed = seconds_since(t0);
  c.expect(std::abs(t - 4.2747) < 5e-5, "threshold " + fmt("%.6f", t) + " != 4.2747");
  c.expect(within_rel(t, 4.3, 0.02), "threshold not within 2% of 4.3");
  c.expect(elapsed < 1e-3, "took " + fmt("%.6f", elapsed) + " s");
  c.note("threshold " + fmt("%.6f", t));
  return c.done();
}

Verdict criterion2() {
  Checker c;
  const auto& s = bundled();
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const PolicyVector p{i * 0.01, {}};
    for (auto obj : {UpperObjective::MaxCircularity, UpperObjective::MinGhg}) {
      const auto e = evaluate_policy(s, p, obj, Money{});
      c.expect(e.response.allocation.at(kGlassRoute) == 0, "glass selected at tax " + fmt("%.2f", p.tax_rate));
      worst = std::max(worst, e.response.circularity_index);
    }
  }
  const double elapsed = seconds_since(t0);
  c.expect(worst <= 1.275 + 1e-12, "circularity reached " + fmt("%.6f", worst));
  c.expect(elapsed < 1.0, "took " + fmt("%.3f", elapsed) + " s");
  c.note("max circularity " + fmt("%.6f", worst) + " over 1001 tax levels");
  return c.done();
}

Verdict subsidy_only_sweep(UpperObjective obj, double at_zero, double at_end, double kink) {
  Checker c;
  const auto& s = bundled();
  const auto t0 = std::chrono::steady_clock::now();
  const auto recs = budget_sweep(s, obj, money_grid(0, 100, 10), SweepMode::SubsidyOnly, PsoParams{});
  const double elapsed = seconds_since(t0);
  double worst_dev = 0.0;
  for (const auto& r : recs) {
    const double b = r.budget.to_double();
    c.expect(!r.error && r.feasible, "cell at " + fmt("%.0f", b) + " failed");
    const double v = r.upper_value;
    if (b == 0.0) {
      c.expect(std::abs(v - at_zero) <= 1e-6, "value at B=0 is " + fmt("%.9f", v));
    } else if (b >= kink) {
      c.expect(std::abs(v - at_end) <= 1e-6, "value at B=" + fmt("%.0f", b) + " is " + fmt("%.9f", v));
    } else {
      const double line = at_zero + (at_end - at_zero) * b / kink;
      worst_dev = std::max(worst_dev, std::abs(v - line) / std::abs(line));
    }
  }
  c.expect(worst_dev <= 0.005, "interior deviates " + fmt("%.4f", worst_dev * 100) + "%");
  c.expect(elapsed < 30.0, "took " + fmt("%.2f", elapsed) + " s");

  // Closed form: units reachable on the target at each budget.
  const auto t1 = std::chrono::steady_clock::now();
  const std::string target = obj == UpperObjective::MinGhg ? kLandfillRoute : kGlassRoute;
  const Money gap = subsidy_threshold(s, target);
  for (const auto& r : recs) {
    const auto units = std::min<std::int64_t>(s.demand(), r.budget.ticks() / gap.ticks());
    c.expect(r.units.count(target) ? r.units.at(target) == units : units == 0,
             "units on " + target + " differ from closed form at B=" + fmt("%.0f", r.budget.to_double()));
  }
  c.expect(seconds_since(t1) < 1.0, "closed form too slow");
  c.note("endpoints " + fmt("%.6f", recs.front().upper_value) + " -> " + fmt("%.6f", recs.back().upper_value));
  c.note("max interior deviation " + fmt("%.4f", worst_dev * 100) + "%");
  c.note(fmt("%.2f s", elapsed));
  return c.done();
}

Verdict criterion3() { return subsidy_only_sweep(UpperObjective::MinGhg, 64.24, 49.97, 61.0); }
Verdict criterion4() { return subsidy_only_sweep(UpperObjective::MaxCircularity, 1.275, 1.475, 67.0); }

Verdict criterion5() {
  Checker c;
  const auto& s = bundled();
  PsoParams p;
  p.swarm_size = 10;
  p.iterations = 200;
  p.restarts = 5;

  auto t0 = std::chrono::steady_clock::now();
  const auto g = optimize(s, UpperObjective::MinGhg, Money{}, p);
  const double tg = seconds_since(t0);
  const double gt = g.best_policy.tax_rate;
  const double gs = g.best_policy.subsidy(kLandfillRoute).to_double();
  c.expect(g.feasible && g.response.allocation.at(kLandfillRoute) == s.demand(), "min-GHG not on landfill");
  c.expect(std::abs(g.upper_value - 49.97) < 1e-9, "emissions " + fmt("%.9f", g.upper_value));
  c.expect(within_rel(gt, 0.9, 0.10), "min-GHG tax " + fmt("%.6f", gt));
  c.expect(within_rel(gs, 0.047, 0.10), "min-GHG subsidy " + fmt("%.6f", gs));
  c.expect(std::abs((g.response.tax_payment - g.response.subsidy_outlay).to_double()) <= 0.01,
           "min-GHG income and outlay differ");
  c.expect(tg < 60.0, "min-GHG run took " + fmt("%.2f", tg) + " s");

  t0 = std::chrono::steady_clock::now();
  const auto m = optimize(s, UpperObjective::MaxCircularity, Money{}, p);
  const double tm = seconds_since(t0);
  const double mt = m.best_policy.tax_rate;
  const double ms = m.best_policy.subsidy(kGlassRoute).to_double();
  c.expect(m.feasible && m.response.allocation.at(kGlassRoute) == s.demand(), "max-circularity not on glass");
  c.expect(std::abs(m.upper_value - 1.475) <= 1e-6, "circularity " + fmt("%.9f", m.upper_value));
  c.expect(within_rel(mt, 1.05, 0.10), "max-circularity tax " + fmt("%.6f", mt));
  c.expect(within_rel(ms, 0.052, 0.10), "max-circularity subsidy " + fmt("%.6f", ms));
  c.expect(tm < 60.0, "max-circularity run took " + fmt("%.2f", tm) + " s");

  c.note("min-GHG tax " + fmt("%.6f", gt) + " subsidy " + fmt("%.6f", gs));
  c.note("max-circularity tax " + fmt("%.6f", mt) + " subsidy " + fmt("%.6f", ms));
  return c.done();
}

Verdict criterion6() {
  Checker c;
  const auto& s = bundled();
  const auto budgets = money_grid(-60, 100, 10);
  c.expect(budgets.size() == 17, "expected 17 budgets");
  for (auto [obj, target, kink] : {std::tuple{UpperObjective::MinGhg, kLandfillRoute, 61.0},
                                   std::tuple{UpperObjective::MaxCircularity, kGlassRoute, 67.0}}) {
    const auto line = tax_budget_line(s, target);
    const double scale = line.tax_at(Money{});
    const auto recs = budget_sweep(s, obj, budgets, SweepMode::Combined, PsoParams{});
    std::vector<double> xb, yt;
    double worst = 0.0;
    for (const auto& r : recs) {
      c.expect(!r.error && r.feasible && r.selected_route == target,
               to_string(obj) + " off pathway at B=" + fmt("%.0f", r.budget.to_double()));
      const double dev = std::abs(r.tax_rate - line.tax_at(r.budget));
      worst = std::max(worst, dev / scale);
      if (r.tax_rate > 1e-6) {
        xb.push_back(r.budget.to_double());
        yt.push_back(r.tax_rate);
      }
    }
    c.expect(worst <= 0.01, to_string(obj) + " tax off the line by " + fmt("%.4f", worst * 100) + "%");
    const auto fit = fit_line(xb, yt);
    const double located = -fit.intercept / fit.slope;
    c.expect(std::abs(located - kink) <= 1.0, to_string(obj) + " kink at " + fmt("%.3f", located));
    c.note(to_string(obj) + " kink " + fmt("%.3f", located) + ", max dev " + fmt("%.4f", worst * 100) + "%");
  }
  return c.done();
}

Verdict criterion7() {
  Checker c;
  const auto& s = bundled();
  const auto l = required_budget_for_fixed_tax(s, kLandfillRoute, 0.1);
  const auto g = required_budget_for_fixed_tax(s, kGlassRoute, 0.1);
  c.expect(std::abs(l.budget.to_double() - 54.58) < 0.005, "min-GHG budget " + l.budget.to_string());
  c.expect(within_rel(l.budget.to_double(), 55.0, 0.05), "min-GHG budget not within 5% of 55");
  c.expect(std::abs(g.budget.to_double() - 60.58) < 0.005, "circularity budget " + g.budget.to_string());
  c.expect(within_rel(g.budget.to_double(), 60.0, 0.05), "circularity budget not within 5% of 60");
  c.expect(within_rel(l.tax_income.to_double(), 4.0, 0.25), "tax income " + l.tax_income.to_string());
  c.note("budgets " + l.budget.to_string(3) + " / " + g.budget.to_string(3) + ", income " +
         l.tax_income.to_string(3));
  return c.done();
}

PsoParams sensitivity_params() {
  PsoParams p;
  p.iterations = 100;
  p.restarts = 3;
  return p;
}

Verdict criterion8() {
  Checker c;
  const auto& s = bundled();
  const std::vector<double> d{7, 15, 65, 140};
  const auto budgets = money_grid(-60, 60, 20);
  const auto ghg = sensitivity_distance(s, UpperObjective::MinGhg, d, budgets, sensitivity_params());
  const auto circ = sensitivity_distance(s, UpperObjective::MaxCircularity, d, budgets, sensitivity_params());
  const std::vector<std::string> want{kGlassRoute, kGlassRoute, kLandfillRoute, kLandfillRoute};
  for (std::size_t i = 0; i < d.size(); ++i) {
    c.expect(ghg[i].pathway == want[i], "min-GHG at " + fmt("%.0f", d[i]) + " mi picks " + ghg[i].pathway);
    c.expect(circ[i].pathway == kGlassRoute, "max-circularity at " + fmt("%.0f", d[i]) + " mi picks " + circ[i].pathway);
  }
  // Tax revenue falls faster with budget as washing distance grows, while the
  // selected route carries the distance effect; an unaffected route is flat.
  for (const auto* levels : {&ghg, &circ}) {
    for (std::size_t i = 1; i < levels->size(); ++i) {
      const auto& a = (*levels)[i - 1];
      const auto& b = (*levels)[i];
      if (a.pathway != b.pathway) {
        continue;
      }
      if (a.pathway == kGlassRoute) {
        c.expect(b.tax_income_slope < a.tax_income_slope,
                 "revenue slope not steeper at " + fmt("%.0f", b.parameter) + " mi");
      } else {
        c.expect(std::abs(b.tax_income_slope - a.tax_income_slope) < 1e-6,
                 "unaffected pathway slope changed at " + fmt("%.0f", b.parameter) + " mi");
      }
    }
  }
  std::string slopes;
  for (const auto& l : circ) {
    slopes += (slopes.empty() ? "" : " ") + fmt("%.6f", l.tax_income_slope);
  }
  c.note("max-circularity revenue slopes " + slopes);
  return c.done();
}

Verdict criterion9() {
  Checker c;
  const auto& s = bundled();
  const std::vector<double> loss{0.01, 0.0313, 0.10};
  const auto budgets = money_grid(-60, 60, 20);
  const auto ghg = sensitivity_loss(s, UpperObjective::MinGhg, loss, budgets, sensitivity_params());
  const std::vector<std::string> want{kGlassRoute, kLandfillRoute, kLandfillRoute};
  for (std::size_t i = 0; i < loss.size(); ++i) {
    c.expect(ghg[i].pathway == want[i], "min-GHG at loss " + fmt("%.4f", loss[i]) + " picks " + ghg[i].pathway);
  }
  const auto circ =
      sensitivity_loss(s, UpperObjective::MaxCircularity, {0.10}, budgets, sensitivity_params());
  const auto& hi = circ.front();
  c.expect(hi.pathway == kGlassRoute, "max-circularity at 10% picks " + hi.pathway);
  c.expect(hi.subsidy_slope < 0.0, "subsidy slope " + fmt("%.6g", hi.subsidy_slope));
  c.expect(hi.industry_cost_slope < 0.0, "industry cost slope " + fmt("%.6g", hi.industry_cost_slope));
  double prev = 1e300;
  for (const auto& r : hi.records) {
    if (r.feasible && r.selected_route == hi.pathway) {
      c.expect(r.industry_cost.to_double() < prev, "industry cost rose at B=" + fmt("%.0f", r.budget.to_double()));
      prev = r.industry_cost.to_double();
    }
  }
  c.note("10% loss subsidy slope " + fmt("%.6g", hi.subsidy_slope) + ", cost slope " +
         fmt("%.6g", hi.industry_cost_slope));
  return c.done();
}

Verdict criterion10() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  testing::Gen g(20240101);
  std::size_t mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    const auto s = testing::random_linear(g, 8, 12);
    const auto p = testing::random_policy(g, s);
    const auto greedy = solve_lower_greedy(s, p).objective;
    const auto milp = solve_lower_milp(s, p).industry_cost;
    const auto en = enumerate_lower(s, p).optimum;
    mismatches += !(greedy == milp && milp == en);
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " pure-linear mismatches");
  std::size_t general = 0;
  for (int i = 0; i < 20; ++i) {
    const auto s = testing::random_general(g, 4, 12);
    const auto p = testing::random_policy(g, s);
    general += !(solve_lower_milp(s, p).industry_cost == enumerate_lower(s, p).optimum);
  }
  c.expect(general == 0, std::to_string(general) + " general mismatches");
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 120.0, "took " + fmt("%.1f", elapsed) + " s");
  c.note("220 instances in " + fmt("%.2f", elapsed) + " s");
  return c.done();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "circpolicy");
  std::vector<const char*> argv;
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out, err;
  return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Verdict criterion11() {
  Checker c;
  const auto root = fs::temp_directory_path() / "circpolicy_acceptance_determinism";
  fs::remove_all(root);
  const std::string scenario = (fs::path(CIRCPOLICY_DATA_DIR) / "coffee_case.scenario").string();
  const std::vector<std::vector<std::string>> commands{
      {"run", "--budget", "0", "--objective", "max-circularity", "--seed", "7"},
      {"sweep", "--objective", "min-ghg", "--mode", "subsidy-only", "--budgets=0:100:10", "--seed", "7"},
      {"sweep", "--objective", "max-circularity", "--budgets=-60:100:20", "--seed", "7"},
      {"sensitivity", "--parameter", "distance", "--budgets=-60:60:30", "--seed", "7"},
      {"sensitivity", "--parameter", "loss", "--budgets=-60:60:30", "--seed", "7"},
      {"verify", "--demand", "8", "--cases", "20", "--seed", "7"},
      {"calibrate"},
  };
  std::size_t files = 0;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      const auto dir = root / std::to_string(i) / std::to_string(rep);
      auto args = commands[i];
      args.insert(args.end(), {"--output-dir", dir.string()});
      if (args[0] != "calibrate") {
        args.insert(args.end(), {"--scenario", scenario});
      }
      const int code = invoke(args);
      c.expect(code == 0, commands[i][0] + " exited " + std::to_string(code));
      dirs.push_back(dir);
    }
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      const auto other = dirs[1] / e.path().filename();
      c.expect(fs::exists(other) && slurp(e.path()) == slurp(other),
               commands[i][0] + " output " + e.path().filename().string() + " differs");
      ++files;
    }
  }
  fs::remove_all(root);
  c.note(std::to_string(files) + " files compared across 7 commands");
  return c.done();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"tax threshold", criterion1},
      {"tax-only policies never reach glass washing", criterion2},
      {"subsidy-only emissions sweep", criterion3},
      {"subsidy-only circularity sweep", criterion4},
      {"zero-budget combined policies", criterion5},
      {"piecewise-linear budget relations", criterion6},
      {"fixed-tax operating points", criterion7},
      {"washing distance sensitivity", criterion8},
      {"glass loss sensitivity", criterion9},
      {"follower solver and oracle equivalence", criterion10},
      {"byte-identical command outputs", criterion11},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu: %s [%s] (%.2f s)\n", v.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
