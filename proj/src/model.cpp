#include "circpolicy/model.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "circpolicy/errors.hpp"

namespace circpolicy {

namespace {

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

RouteSpec effective_route(const RouteSpec& base, const SensitivityModifiers& m) {
  RouteSpec r = base;
  r.unit_cost = base.unit_cost + Money::from_double(m.distance_cost_coeff * m.glass_wash_distance) +
                Money::from_double(m.loss_cost_coeff * m.glass_loss_fraction);
  r.unit_emissions = base.unit_emissions + m.distance_emission_coeff * m.glass_wash_distance +
                     m.loss_emission_coeff * m.glass_loss_fraction;
  return r;
}

void check_route(const RouteSpec& r, const std::string& path, std::vector<std::string>& issues) {
  if (!std::isfinite(r.unit_emissions) || r.unit_emissions < 0.0) {
    issues.push_back(path + ".unit_emissions: must be finite and >= 0");
  }
  if (!std::isfinite(r.unit_circularity) || r.unit_circularity < 0.0 || r.unit_circularity > 2.0) {
    issues.push_back(path + ".unit_circularity: must lie in [0, 2]");
  }
}

}  // namespace

Scenario::Scenario(ScenarioSpec spec) : spec_(std::move(spec)) {
  std::vector<std::string> issues;

  if (spec_.demand < 0) {
    issues.push_back("demand: must be >= 0");
  }
  if (spec_.routes.empty()) {
    issues.push_back("routes: at least one route is required");
  }

  const auto& m = spec_.modifiers;
  if (!finite_nonneg(m.glass_wash_distance)) {
    issues.push_back("modifiers.glass_wash_distance: must be finite and >= 0");
  }
  if (!finite_nonneg(m.glass_loss_fraction) || m.glass_loss_fraction >= 1.0) {
    issues.push_back("modifiers.glass_loss_fraction: must lie in [0, 1)");
  }
  for (auto [name, value] : {std::pair{"distance_cost_coeff", m.distance_cost_coeff},
                             std::pair{"distance_emission_coeff", m.distance_emission_coeff},
                             std::pair{"loss_cost_coeff", m.loss_cost_coeff},
                             std::pair{"loss_emission_coeff", m.loss_emission_coeff}}) {
    if (!finite_nonneg(value)) {
      issues.push_back(std::string("modifiers.") + name + ": must be finite and >= 0");
    }
  }

  std::set<std::string> affected(m.affected_route_ids.begin(), m.affected_route_ids.end());
  for (std::size_t i = 0; i < spec_.routes.size(); ++i) {
    const auto& r = spec_.routes[i];
    const std::string path = "routes[" + std::to_string(i) + "]";
    if (r.route_id.empty()) {
      issues.push_back(path + ".route_id: must not be empty");
    } else if (!index_.emplace(r.route_id, i).second) {
      issues.push_back(path + ".route_id: duplicate id '" + r.route_id + "'");
    }
    check_route(r, path, issues);
    if (affected.contains(r.route_id)) {
      effective_.push_back(effective_route(r, m));
      check_route(effective_.back(), path + "(effective)", issues);
    } else {
      effective_.push_back(r);
    }
  }
  for (const auto& id : m.affected_route_ids) {
    if (!index_.contains(id)) {
      issues.push_back("modifiers.affected_route_ids: unknown route '" + id + "'");
    }
  }

  for (const auto& [tech, cost] : spec_.technology_fixed_costs) {
    if (cost < Money{}) {
      issues.push_back("technology_fixed_costs." + tech + ": must be >= 0");
    }
  }

  if (!spec_.capacity_limits.empty()) {
    std::int64_t total = 0;
    for (const auto& [id, cap] : spec_.capacity_limits) {
      if (!index_.contains(id)) {
        issues.push_back("capacity_limits." + id + ": unknown route");
      }
      if (cap < 0) {
        issues.push_back("capacity_limits." + id + ": must be >= 0");
      }
    }
    for (const auto& r : spec_.routes) {
      auto it = spec_.capacity_limits.find(r.route_id);
      total += it == spec_.capacity_limits.end() ? spec_.demand : std::max<std::int64_t>(0, it->second);
    }
    if (total < spec_.demand) {
      issues.push_back("capacity_limits: total capacity " + std::to_string(total) +
                       " is below demand " + std::to_string(spec_.demand));
    }
  }

  if (!finite_nonneg(spec_.policy_bounds.max_tax)) {
    issues.push_back("policy_bounds.max_tax: must be finite and >= 0");
  }
  if (!finite_nonneg(spec_.policy_bounds.max_subsidy)) {
    issues.push_back("policy_bounds.max_subsidy: must be finite and >= 0");
  }

  if (!issues.empty()) {
    throw ValidationError(std::move(issues));
  }
}

std::optional<std::size_t> Scenario::index_of(const std::string& route_id) const {
  auto it = index_.find(route_id);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

const RouteSpec& Scenario::route(const std::string& route_id) const {
  auto idx = index_of(route_id);
  if (!idx) {
    throw InvalidAllocation("unknown route '" + route_id + "'");
  }
  return effective_[*idx];
}

std::int64_t Scenario::capacity(std::size_t index) const {
  auto it = spec_.capacity_limits.find(effective_.at(index).route_id);
  if (it == spec_.capacity_limits.end()) {
    return spec_.demand;
  }
  return std::min(it->second, spec_.demand);
}

Money Scenario::fixed_cost(const std::string& technology_id) const {
  auto it = spec_.technology_fixed_costs.find(technology_id);
  return it == spec_.technology_fixed_costs.end() ? Money{} : it->second;
}

bool Scenario::is_pure_linear() const {
  for (const auto& [tech, cost] : spec_.technology_fixed_costs) {
    if (cost > Money{}) {
      return false;
    }
  }
  for (const auto& [id, cap] : spec_.capacity_limits) {
    if (cap < spec_.demand) {
      return false;
    }
  }
  return true;
}

Allocation::Allocation(const Scenario& scenario, std::map<std::string, std::int64_t> units)
    : Allocation(unchecked(std::move(units))) {
  validate_allocation(scenario, *this);
}

Allocation Allocation::unchecked(std::map<std::string, std::int64_t> units) {
  Allocation a;
  for (auto& [id, n] : units) {
    if (n != 0) {
      a.units_.emplace(id, n);
    }
  }
  return a;
}

Allocation Allocation::all_on(const Scenario& scenario, const std::string& route_id) {
  return Allocation(scenario, {{route_id, scenario.demand()}});
}

std::int64_t Allocation::at(const std::string& route_id) const {
  auto it = units_.find(route_id);
  return it == units_.end() ? 0 : it->second;
}

std::int64_t Allocation::total() const {
  std::int64_t t = 0;
  for (const auto& [id, n] : units_) {
    t += n;
  }
  return t;
}

void validate_allocation(const Scenario& scenario, const Allocation& allocation) {
  std::int64_t total = 0;
  for (const auto& [id, n] : allocation.units()) {
    auto idx = scenario.index_of(id);
    if (!idx) {
      throw InvalidAllocation("allocation references unknown route '" + id + "'");
    }
    if (n < 0) {
      throw InvalidAllocation("negative units on route '" + id + "'");
    }
    if (n > scenario.capacity(*idx)) {
      throw InvalidAllocation("units on route '" + id + "' exceed its capacity");
    }
    total += n;
  }
  if (total != scenario.demand()) {
    throw InvalidAllocation("allocation covers " + std::to_string(total) + " units, demand is " +
                            std::to_string(scenario.demand()));
  }
}

Money PolicyVector::subsidy(const std::string& route_id) const {
  auto it = subsidy_rates.find(route_id);
  return it == subsidy_rates.end() ? Money{} : it->second;
}

void validate_policy(const Scenario& scenario, const PolicyVector& policy) {
  if (!std::isfinite(policy.tax_rate) || policy.tax_rate < 0.0) {
    throw InvalidPolicy("tax rate must be finite and >= 0");
  }
  for (const auto& [id, rate] : policy.subsidy_rates) {
    auto idx = scenario.index_of(id);
    if (!idx) {
      throw InvalidPolicy("subsidy on unknown route '" + id + "'");
    }
    if (rate < Money{}) {
      throw InvalidPolicy("negative subsidy on route '" + id + "'");
    }
    if (rate > Money{} && !scenario.routes()[*idx].subsidizable) {
      throw InvalidPolicy("route '" + id + "' is not subsidizable");
    }
  }
}

Money unit_tax(const RouteSpec& route, double tax_rate) {
  return Money::from_double(tax_rate * route.unit_emissions);
}

double evaluate_emissions(const Scenario& scenario, const Allocation& allocation) {
  validate_allocation(scenario, allocation);
  double total = 0.0;
  for (const auto& [id, n] : allocation.units()) {
    total += static_cast<double>(n) * scenario.route(id).unit_emissions;
  }
  return total;
}

Money evaluate_subsidy(const Scenario& scenario, const Allocation& allocation,
                       const PolicyVector& policy) {
  validate_allocation(scenario, allocation);
  Money total;
  for (const auto& [id, n] : allocation.units()) {
    total += policy.subsidy(id) * n;
  }
  return total;
}

Money evaluate_tax(const Scenario& scenario, const Allocation& allocation,
                   const PolicyVector& policy) {
  validate_allocation(scenario, allocation);
  Money total;
  for (const auto& [id, n] : allocation.units()) {
    total += unit_tax(scenario.route(id), policy.tax_rate) * n;
  }
  return total;
}

Money evaluate_cost(const Scenario& scenario, const Allocation& allocation,
                    const PolicyVector& policy) {
  validate_allocation(scenario, allocation);
  validate_policy(scenario, policy);
  Money total;
  std::set<std::string> active;
  for (const auto& [id, n] : allocation.units()) {
    const auto& r = scenario.route(id);
    total += (r.unit_cost + unit_tax(r, policy.tax_rate) - policy.subsidy(id)) * n;
    active.insert(r.technology_id);
  }
  for (const auto& tech : active) {
    total += scenario.fixed_cost(tech);
  }
  return total;
}

double evaluate_circularity(const Scenario& scenario, const Allocation& allocation) {
  validate_allocation(scenario, allocation);
  if (scenario.demand() == 0) {
    throw UndefinedIndex("circularity index is undefined for zero demand");
  }
  double weighted = 0.0;
  for (const auto& [id, n] : allocation.units()) {
    weighted += static_cast<double>(n) * scenario.route(id).unit_circularity;
  }
  return weighted / static_cast<double>(scenario.demand());
}

LowerResult make_lower_result(const Scenario& scenario, const PolicyVector& policy,
                              const Allocation& allocation) {
  LowerResult r;
  r.allocation = allocation;
  r.industry_cost = evaluate_cost(scenario, allocation, policy);
  r.total_emissions = evaluate_emissions(scenario, allocation);
  r.circularity_index = scenario.demand() > 0 ? evaluate_circularity(scenario, allocation) : 0.0;
  r.subsidy_outlay = evaluate_subsidy(scenario, allocation, policy);
  r.tax_payment = evaluate_tax(scenario, allocation, policy);
  return r;
}

Scenario apply_modifiers(const Scenario& scenario, double distance, double loss) {
  if (!(distance >= 0.0) || !std::isfinite(distance)) {
    throw PreconditionViolated("washing distance must be finite and >= 0");
  }
  if (!(loss >= 0.0) || loss >= 1.0) {
    throw PreconditionViolated("loss fraction must lie in [0, 1)");
  }
  ScenarioSpec spec = scenario.spec();
  spec.modifiers.glass_wash_distance = distance;
  spec.modifiers.glass_loss_fraction = loss;
  return Scenario(std::move(spec));
}

}  // namespace circpolicy
