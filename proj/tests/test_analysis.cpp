#include <doctest.h>

#include <cmath>

#include "circpolicy/analysis.hpp"
#include "support.hpp"

using namespace circpolicy;
using testing::case_study;

namespace {

std::vector<Money> budgets(std::initializer_list<const char*> xs) {
  std::vector<Money> out;
  for (const char* x : xs) {
    out.push_back(Money::parse(x));
  }
  return out;
}

PsoParams quick() {
  PsoParams p;
  p.iterations = 60;
  p.restarts = 2;
  return p;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("tax thresholds") {
  const auto& s = case_study();
  const double exact = 0.061 / 0.01427;
  CHECK(tax_threshold(s, "strap", "landfill") == doctest::Approx(exact).epsilon(1e-12));
  CHECK(exact == doctest::Approx(4.274702172).epsilon(1e-10));
  CHECK(tax_threshold(s, "strap", "glass-washing") ==
        doctest::Approx(0.067 / 0.01416).epsilon(1e-12));
  CHECK(tax_threshold(s, "landfill", "strap") == 0.0);
  CHECK_THROWS_AS(tax_threshold(s, "landfill", "glass-washing"), NoThreshold);
  CHECK(tax_threshold(s, "landfill", "landfill") == 0.0);
}

TEST_CASE("subsidy thresholds") {
  const auto& s = case_study();
  CHECK(subsidy_threshold(s, "landfill") == Money::parse("0.061"));
  CHECK(subsidy_threshold(s, "glass-washing") == Money::parse("0.067"));
  CHECK(subsidy_threshold(s, "strap") == Money{});
}

TEST_CASE("tax-budget lines") {
  const auto& s = case_study();
  const auto l = tax_budget_line(s, "landfill");
  CHECK(l.slope == doctest::Approx(-1.0 / 64.24));
  CHECK(l.intercept == doctest::Approx(61.0 / 64.24));
  CHECK(l.kink == Money::parse("61"));
  CHECK(l.tax_at(Money{}) == doctest::Approx(0.949564134));
  CHECK(l.tax_at(Money::parse("-60")) == doctest::Approx(121.0 / 64.24));
  CHECK(l.tax_at(Money::parse("61")) == 0.0);
  CHECK(l.tax_at(Money::parse("500")) == 0.0);

  const auto g = tax_budget_line(s, "glass-washing");
  CHECK(g.kink == Money::parse("67"));
  CHECK(g.tax_at(Money{}) == doctest::Approx(67.0 / 64.24));

  const auto none = tax_budget_line(s, "strap");
  CHECK(none.kink == Money{});
  CHECK(none.tax_at(Money::parse("-5")) == 0.0);
}

TEST_CASE("budget needed at a fixed tax") {
  const auto& s = case_study();
  const auto l = required_budget_for_fixed_tax(s, "landfill", 0.1);
  CHECK(l.budget.to_double() == doctest::Approx(54.576).epsilon(1e-9));
  CHECK(l.tax_income.to_double() == doctest::Approx(4.997).epsilon(1e-9));
  CHECK(l.subsidy_outlay.to_double() == doctest::Approx(59.573).epsilon(1e-9));
  const auto g = required_budget_for_fixed_tax(s, "glass-washing", 0.1);
  CHECK(g.budget.to_double() == doctest::Approx(60.576).epsilon(1e-9));
  CHECK(g.tax_income.to_double() == doctest::Approx(5.008).epsilon(1e-9));
  CHECK_THROWS_AS(required_budget_for_fixed_tax(s, "landfill", -1.0), PreconditionViolated);
}

TEST_CASE("minimum tax for a target") {
  const auto& s = case_study();
  CHECK(min_tax_for_target(s, "landfill", Money{}) == doctest::Approx(61.0 / 64.24));
  CHECK(min_tax_for_target(s, "landfill", Money::parse("61")) == 0.0);
  CHECK(min_tax_for_target(s, "landfill", Money::parse("-25")) == doctest::Approx(86.0 / 64.24));
  CHECK(min_tax_for_target(s, "glass-washing", Money{}) == doctest::Approx(67.0 / 64.24));
  // Budget deficits larger than the cost gap bind on the target's own tax base.
  CHECK(min_tax_for_target(s, "landfill", Money::parse("-3000")) ==
        doctest::Approx(3000.0 / 49.97));
}

TEST_CASE("minimum tax is sufficient on random scenarios") {
  testing::Gen g(404);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = testing::random_linear(g, 5, 20);
    std::string target;
    for (const auto& r : s.routes()) {
      if (r.subsidizable && r.unit_emissions > 0.0) {
        target = r.route_id;
      }
    }
    if (target.empty()) {
      continue;
    }
    const Money budget = Money::from_ticks(g.pick(-20, 20) * 100'000'000);
    double tax = 0.0;
    try {
      tax = min_tax_for_target(s, target, budget);
    } catch (const NoThreshold&) {
      continue;
    }
    tax += 1e-6;
    const auto& t = s.route(target);
    const std::int64_t n = s.demand();
    // Largest subsidy the funds allow, rounded down to a tick.
    const auto income = unit_tax(t, tax) * n;
    const auto cap_ticks = (budget + income).ticks() / n;
    if (cap_ticks < 0) {
      continue;
    }
    PolicyVector p{tax, {{target, Money::from_ticks(cap_ticks)}}};
    const auto all = make_lower_result(s, p, Allocation::all_on(s, target));
    CHECK(all.subsidy_outlay <= budget + all.tax_payment);
    const auto mine = net_unit_cost(t, p);
    for (const auto& r : s.routes()) {
      CHECK(mine <= net_unit_cost(r, p) + Money::from_ticks(1));
    }
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("calibration") {
  const auto& s = case_study();
  for (const auto& [name, value] : anchor_residuals(s)) {
    if (name == "tax_threshold") {
      CHECK(std::abs(value) < 0.03);
    } else {
      INFO(name);
      CHECK(std::abs(value) < 1e-9);
    }
  }
  CalibrationAnchors bad;
  bad.emissions_landfill = 70.0;
  CHECK_THROWS_AS(calibrate_case_study(bad), CalibrationError);
  CalibrationAnchors demand;
  demand.demand = 0;
  CHECK_THROWS_AS(calibrate_case_study(demand), CalibrationError);
}

TEST_CASE("modes") {
  CHECK(parse_mode("subsidy-only") == SweepMode::SubsidyOnly);
  CHECK(parse_mode("tax-only") == SweepMode::TaxOnly);
  CHECK(to_string(SweepMode::Combined) == "combined");
  CHECK_THROWS_AS(parse_mode("both"), PreconditionViolated);
  const auto b = bounds_for_mode(case_study(), SweepMode::SubsidyOnly);
  CHECK(b[0] == Bound{0.0, 0.0});
  CHECK(b[1] == Bound{0.0, 0.5});
}

TEST_CASE("line fitting") {
  const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(fit_line({}, {}).slope == 0.0);
  CHECK(fit_line({1}, {4}).intercept == 4.0);
  CHECK_THROWS_AS(fit_line({1, 2}, {1}), PreconditionViolated);
}

TEST_CASE("combined sweep follows the closed-form line and flattens past the kink") {
  const auto& s = case_study();
  const auto line = tax_budget_line(s, "landfill");
  const auto recs = budget_sweep(s, UpperObjective::MinGhg,
                                 budgets({"-30", "0", "30", "60", "80", "120"}),
                                 SweepMode::Combined, PsoParams{});
  REQUIRE(recs.size() == 6);
  for (const auto& r : recs) {
    CHECK_FALSE(r.error);
    CHECK(r.feasible);
    CHECK(r.selected_route == "landfill");
    CHECK(r.emissions == doctest::Approx(49.97).epsilon(1e-12));
    CHECK(std::abs(r.tax_rate - line.tax_at(r.budget)) < 1e-6);
  }
  CHECK(recs[4].tax_rate < 1e-6);
  CHECK(recs[5].tax_rate < 1e-6);
  CHECK(recs[4].upper_value == recs[5].upper_value);
  // Zero budget: the outlay is funded by the tax alone.
  CHECK(std::abs((recs[1].tax_income - recs[1].subsidy_outlay).to_double()) < 1e-3);
}

TEST_CASE("subsidy-only pathway improves monotonically with budget") {
  const auto recs = budget_sweep(case_study(), UpperObjective::MinGhg,
                                 budgets({"0", "10", "20", "30", "45", "61", "70"}),
                                 SweepMode::SubsidyOnly, quick());
  double prev = 1e300;
  std::int64_t units = 0;
  for (const auto& r : recs) {
    CHECK(r.feasible);
    CHECK(r.tax_rate == 0.0);
    CHECK(r.emissions <= prev + 1e-9);
    prev = r.emissions;
    const auto it = r.units.find("landfill");
    const std::int64_t now = it == r.units.end() ? 0 : it->second;
    CHECK(now >= units);
    units = now;
  }
  CHECK(recs.front().emissions == doctest::Approx(64.24));
  CHECK(recs.back().emissions == doctest::Approx(49.97));
}

TEST_CASE("optimal pathway is invariant to scaling demand and budget together") {
  const auto& s = case_study();
  ScenarioSpec spec = s.spec();
  spec.demand *= 3;
  const Scenario big(spec);
  for (auto obj : {UpperObjective::MinGhg, UpperObjective::MaxCircularity}) {
    for (const char* b : {"0", "20"}) {
      const Money budget = Money::parse(b);
      const auto small = budget_sweep(s, obj, {budget}, SweepMode::Combined, quick());
      const auto large = budget_sweep(big, obj, {budget * 3}, SweepMode::Combined, quick());
      CHECK(small[0].selected_route == large[0].selected_route);
      CHECK(small[0].tax_rate == doctest::Approx(large[0].tax_rate).epsilon(1e-4));
    }
  }
}

TEST_CASE("scaling every cost scales thresholds and keeps pathways") {
  const auto& s = case_study();
  ScenarioSpec spec = s.spec();
  for (auto& r : spec.routes) {
    r.unit_cost = r.unit_cost * 2;
  }
  spec.modifiers.distance_cost_coeff *= 2;
  spec.modifiers.loss_cost_coeff *= 2;
  spec.policy_bounds.max_tax *= 2;
  spec.policy_bounds.max_subsidy *= 2;
  const Scenario twice(spec);
  CHECK(tax_threshold(twice, "strap", "landfill") ==
        doctest::Approx(2 * tax_threshold(s, "strap", "landfill")));
  CHECK(subsidy_threshold(twice, "glass-washing") == subsidy_threshold(s, "glass-washing") * 2);
  for (auto obj : {UpperObjective::MinGhg, UpperObjective::MaxCircularity}) {
    const auto a = budget_sweep(s, obj, budgets({"-20", "0", "40"}), SweepMode::Combined, quick());
    const auto b = budget_sweep(twice, obj, budgets({"-40", "0", "80"}), SweepMode::Combined, quick());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].selected_route == b[i].selected_route);
      CHECK(b[i].tax_rate == doctest::Approx(2 * a[i].tax_rate).epsilon(1e-4));
    }
  }
}

TEST_CASE("distance sensitivity pathways") {
  const auto levels = sensitivity_distance(case_study(), UpperObjective::MinGhg,
                                           {7.0, 15.0, 65.0, 140.0},
                                           budgets({"-20", "0", "20", "40"}), quick());
  REQUIRE(levels.size() == 4);
  CHECK(levels[0].pathway == "glass-washing");
  CHECK(levels[1].pathway == "glass-washing");
  CHECK(levels[2].pathway == "landfill");
  CHECK(levels[3].pathway == "landfill");
  CHECK(levels[2].tax_income_slope == doctest::Approx(levels[3].tax_income_slope).epsilon(1e-6));
  CHECK(levels[0].tax_income_slope > levels[1].tax_income_slope);
  for (const auto& l : levels) {
    CHECK(l.tax_rate_slope < 0.0);
  }
}

TEST_CASE("loss sensitivity pathways") {
  const auto levels = sensitivity_loss(case_study(), UpperObjective::MinGhg, {0.01, 0.0313, 0.10},
                                       budgets({"-20", "0", "20", "40"}), quick());
  CHECK(levels[0].pathway == "glass-washing");
  CHECK(levels[1].pathway == "landfill");
  CHECK(levels[2].pathway == "landfill");
}

}  // TEST_SUITE
