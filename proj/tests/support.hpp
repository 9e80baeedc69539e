#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>

#include "circpolicy/analysis.hpp"

namespace testing {

using namespace circpolicy;

/// Small deterministic generator for property tests.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  std::int64_t pick(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  }
  bool coin() { return pick(0, 1) == 1; }
};

inline const Scenario& case_study() {
  static const Scenario s = calibrate_case_study();
  return s;
}

/// Pure-linear scenario. Costs sit on a 1e-5 grid, emissions on 1e-4, so with
/// tax rates on a 0.1 grid every per-unit quantity is a multiple of 1e-5.
inline Scenario random_linear(Gen& g, std::size_t max_routes = 8, std::int64_t max_demand = 12) {
  ScenarioSpec spec;
  spec.name = "prop";
  spec.demand = g.pick(1, max_demand);
  const auto n = static_cast<std::size_t>(g.pick(1, static_cast<std::int64_t>(max_routes)));
  for (std::size_t i = 0; i < n; ++i) {
    RouteSpec r;
    r.route_id = "route" + std::to_string(i);
    r.product_id = "product";
    r.technology_id = "tech" + std::to_string(i);
    r.unit_cost = Money::from_ticks(g.pick(-2000, 8000) * 10'000);
    r.unit_emissions = static_cast<double>(g.pick(0, 1500)) * 1e-4;
    r.unit_circularity = static_cast<double>(g.pick(0, 200)) / 100.0;
    r.subsidizable = g.coin();
    spec.routes.push_back(std::move(r));
  }
  return Scenario(std::move(spec));
}

/// Capacities and shared activation costs on top of random_linear's grids.
inline Scenario random_general(Gen& g, std::size_t max_routes = 4, std::int64_t max_demand = 12) {
  ScenarioSpec spec = random_linear(g, max_routes, max_demand).spec();
  for (auto& r : spec.routes) {
    r.technology_id = "tech" + std::to_string(g.pick(0, 2));
  }
  for (int t = 0; t < 3; ++t) {
    spec.technology_fixed_costs["tech" + std::to_string(t)] =
        Money::from_ticks(g.pick(0, 40) * 1'000'000);
  }
  std::int64_t total = 0;
  for (const auto& r : spec.routes) {
    const auto cap = g.pick(0, spec.demand);
    spec.capacity_limits[r.route_id] = cap;
    total += cap;
  }
  if (total < spec.demand) {
    spec.capacity_limits[spec.routes.back().route_id] = spec.demand;
  }
  return Scenario(std::move(spec));
}

inline PolicyVector random_policy(Gen& g, const Scenario& s) {
  PolicyVector p;
  p.tax_rate = static_cast<double>(g.pick(0, 40)) / 10.0;
  for (const auto& r : s.routes()) {
    if (r.subsidizable && g.coin()) {
      p.subsidy_rates[r.route_id] = Money::from_ticks(g.pick(0, 6000) * 10'000);
    }
  }
  return p;
}

/// Follower cost of an allocation recomputed from scratch in ticks.
inline std::int64_t cost_ticks(const Scenario& s, const PolicyVector& p,
                               const std::map<std::string, std::int64_t>& units) {
  std::int64_t total = 0;
  std::set<std::string> techs;
  for (const auto& [id, k] : units) {
    if (k == 0) {
      continue;
    }
    const auto& r = s.route(id);
    const std::int64_t tax = std::llround(p.tax_rate * r.unit_emissions * 1e9);
    total += (r.unit_cost.ticks() + tax - p.subsidy(id).ticks()) * k;
    techs.insert(r.technology_id);
  }
  for (const auto& t : techs) {
    total += s.fixed_cost(t).ticks();
  }
  return total;
}

}  // namespace testing
