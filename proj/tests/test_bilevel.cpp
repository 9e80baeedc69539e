#include <doctest.h>

#include <cmath>

#include "circpolicy/bilevel.hpp"
#include "support.hpp"

using namespace circpolicy;
using testing::case_study;

namespace {

PsoParams quick() {
  PsoParams p;
  p.iterations = 60;
  p.restarts = 2;
  return p;
}

}  // namespace

TEST_SUITE("bilevel") {

TEST_CASE("policy space layout") {
  const auto& s = case_study();
  const PolicySpace space(s);
  CHECK(space.dimension() == 3);
  CHECK(space.subsidized_routes() == std::vector<std::string>{"landfill", "glass-washing"});
  CHECK(space.bounds()[0] == Bound{0.0, 10.0});
  CHECK(space.bounds()[1] == Bound{0.0, 0.5});

  PolicyVector p{1.5, {{"glass-washing", Money::parse("0.02")}}};
  CHECK(space.to_policy(space.to_point(p)) == p);
  CHECK_THROWS_AS(PolicySpace(s, {{0.0, 1.0}}), PreconditionViolated);
}

TEST_CASE("evaluate_policy examples") {
  const auto& s = case_study();
  const auto zero = evaluate_policy(s, PolicyVector{}, UpperObjective::MinGhg, Money{});
  CHECK(zero.feasible);
  CHECK(zero.upper_value == doctest::Approx(64.24).epsilon(1e-12));

  // Landfill at one cent above indifference cannot be funded from nothing.
  PolicyVector rich;
  rich.subsidy_rates["landfill"] = Money::parse("0.062");
  const auto broke = evaluate_policy(s, rich, UpperObjective::MinGhg, Money{});
  CHECK_FALSE(broke.feasible);
  CHECK(broke.funds_violation == Money::parse("62"));
  CHECK(broke.score == doctest::Approx(49.97 + kDefaultPenaltyWeight * 62.0));

  // At exact indifference the follower is tied, and the leader keeps strap.
  PolicyVector tied;
  tied.subsidy_rates["landfill"] = Money::parse("0.061");
  const auto t = evaluate_policy(s, tied, UpperObjective::MinGhg, Money{});
  CHECK(t.feasible);
  CHECK(t.response.allocation.at("strap") == 1000);

  // Joint indifference and funds balance.
  const double tax = 61.0 / 64.24;
  CHECK(tax == doctest::Approx(0.9495641344).epsilon(1e-9));
  PolicyVector apex{tax, {}};
  apex.subsidy_rates["landfill"] =
      Money::from_ticks(static_cast<std::int64_t>(std::floor(tax * 0.04997 * 1e9)));
  CHECK(apex.subsidy("landfill").to_double() == doctest::Approx(0.0474497).epsilon(1e-6));
  const auto a = evaluate_policy(s, apex, UpperObjective::MinGhg, Money{});
  CHECK(a.feasible);
  CHECK(a.upper_value == doctest::Approx(49.97).epsilon(1e-12));
  CHECK(std::abs((a.response.tax_payment - a.response.subsidy_outlay).to_double()) < 1e-3);
}

TEST_CASE("general scenarios go through branch and bound") {
  ScenarioSpec spec = case_study().spec();
  spec.capacity_limits["strap"] = 400;
  const Scenario s(spec);
  const auto e = evaluate_policy(s, PolicyVector{}, UpperObjective::MinGhg, Money{});
  CHECK(e.response.allocation.at("strap") == 400);
  CHECK(e.response.allocation.at("landfill") == 600);
  CHECK(e.upper_value == doctest::Approx(55.678));
}

TEST_CASE("rank orders feasibility, objective, tax, then subsidy") {
  PolicyEvaluation ok;
  ok.feasible = true;
  ok.score = 10.0;
  PolicyEvaluation bad = ok;
  bad.feasible = false;
  bad.score = 1.0;
  const PolicyVector low{0.5, {}}, high{0.7, {}};
  CHECK(rank(ok, high) < rank(bad, low));
  CHECK(rank(ok, low) < rank(ok, high));
  PolicyVector sub = low;
  sub.subsidy_rates["x"] = Money::parse("0.1");
  CHECK(rank(ok, low) < rank(ok, sub));
}

TEST_CASE("zero-budget optima on the case study") {
  const auto& s = case_study();
  const auto ghg = optimize(s, UpperObjective::MinGhg, Money{}, PsoParams{});
  CHECK(ghg.feasible);
  CHECK(ghg.response.allocation.at("landfill") == 1000);
  CHECK(ghg.upper_value == doctest::Approx(49.97).epsilon(1e-12));
  CHECK(ghg.best_policy.tax_rate == doctest::Approx(0.9).epsilon(0.1));
  CHECK(ghg.best_policy.subsidy("landfill").to_double() == doctest::Approx(0.047).epsilon(0.1));

  const auto circ = optimize(s, UpperObjective::MaxCircularity, Money{}, PsoParams{});
  CHECK(circ.feasible);
  CHECK(circ.response.allocation.at("glass-washing") == 1000);
  CHECK(circ.upper_value == doctest::Approx(1.475).epsilon(1e-9));
  CHECK(circ.best_policy.tax_rate == doctest::Approx(1.05).epsilon(0.1));
  CHECK(circ.best_policy.subsidy("glass-washing").to_double() == doctest::Approx(0.052).epsilon(0.1));
}

TEST_CASE("subsidy alone reaches glass once the budget covers it") {
  const auto& s = case_study();
  PsoParams p = quick();
  p.bounds = {{0.0, 0.0}, {0.0, 0.5}, {0.0, 0.5}};
  const auto o = optimize(s, UpperObjective::MaxCircularity, Money::parse("67"), p);
  CHECK(o.feasible);
  CHECK(o.best_policy.tax_rate == 0.0);
  CHECK(o.response.allocation.at("glass-washing") == 1000);
}

TEST_CASE("optimize is deterministic and sound") {
  const auto& s = case_study();
  const auto a = optimize(s, UpperObjective::MaxCircularity, Money::parse("20"), quick());
  const auto b = optimize(s, UpperObjective::MaxCircularity, Money::parse("20"), quick());
  CHECK(a.trace == b.trace);
  CHECK(a.best_policy == b.best_policy);
  CHECK(a.response.allocation == b.response.allocation);
}

TEST_CASE("search properties on random scenarios") {
  testing::Gen g(31337);
  for (int trial = 0; trial < 25; ++trial) {
    const auto s = testing::random_linear(g, 5, 30);
    const Money budget = Money::from_ticks(g.pick(0, 50) * 100'000'000);
    const auto obj = g.coin() ? UpperObjective::MinGhg : UpperObjective::MaxCircularity;
    OptimizeOptions opts;
    opts.polish = g.coin();
    opts.pathway_seeds = g.coin();
    const auto o = optimize(s, obj, budget, quick(), opts);

    for (std::size_t i = 1; i < o.trace.size(); ++i) {
      CHECK(o.trace[i].score <= o.trace[i - 1].score + 1e-12);
    }
    const auto zero = evaluate_policy(s, PolicyVector{}, obj, budget);
    CHECK(o.feasible);
    CHECK(minimization_form(o.upper_value, obj) <= minimization_form(zero.upper_value, obj) + 1e-12);
    const auto again = evaluate_policy(s, o.best_policy, obj, budget);
    CHECK(again.feasible == o.feasible);
    CHECK(again.response.subsidy_outlay.to_double() <=
          (budget + again.response.tax_payment).to_double() + 1e-6);
  }
}

TEST_CASE("most-profitable mode reports the follower optimum") {
  const auto o = optimize(case_study(), UpperObjective::MostProfitable, Money{}, quick());
  CHECK(o.best_policy == PolicyVector{});
  CHECK(o.response.industry_cost == Money::parse("-0.93"));
}

}  // TEST_SUITE
