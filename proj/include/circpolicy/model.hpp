#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "circpolicy/money.hpp"

namespace circpolicy {

/// One (product, waste technology, recovered outputs) pathway with per-unit
/// coefficients. unit_cost is the net cost: production plus transport plus
/// waste management, minus revenue from recovered products.
struct RouteSpec {
  std::string route_id;
  std::string product_id;
  std::string technology_id;
  std::vector<std::string> recovered_outputs;
  Money unit_cost;
  double unit_emissions = 0.0;    // kg-CO2e per unit
  double unit_circularity = 0.0;  // in [0, 2]
  bool subsidizable = false;
  /// Placeholder route kept to mirror the full superstructure; never optimal.
  bool dominated = false;
  /// Optional per-stage metadata. Never read by the solvers.
  std::map<std::string, double> stage_breakdown;

  bool operator==(const RouteSpec&) const = default;
};

/// Linear adjustment of the affected routes' coefficients with washing
/// distance and glass loss: effective = base + coeff_d * distance + coeff_l * loss.
struct SensitivityModifiers {
  double glass_wash_distance = 0.0;  // miles
  double glass_loss_fraction = 0.0;  // [0, 1)
  double distance_cost_coeff = 0.0;      // currency / unit / mile
  double distance_emission_coeff = 0.0;  // kg / unit / mile
  double loss_cost_coeff = 0.0;          // currency / unit / fraction
  double loss_emission_coeff = 0.0;      // kg / unit / fraction
  std::vector<std::string> affected_route_ids;

  bool operator==(const SensitivityModifiers&) const = default;
};

/// Search box for the leader's instruments.
struct PolicyBounds {
  double max_tax = 10.0;      // currency / kg-CO2e
  double max_subsidy = 0.5;   // currency / unit

  bool operator==(const PolicyBounds&) const = default;
};

/// Plain data describing a scenario; validated by Scenario's constructor.
struct ScenarioSpec {
  std::string name;
  std::int64_t demand = 0;
  std::vector<RouteSpec> routes;  // base coefficients (zero distance, zero loss)
  SensitivityModifiers modifiers;
  std::map<std::string, Money> technology_fixed_costs;
  std::map<std::string, std::int64_t> capacity_limits;
  PolicyBounds policy_bounds;

  bool operator==(const ScenarioSpec&) const = default;
};

/// Immutable, validated scenario. Effective route coefficients (modifiers
/// applied) are computed once on construction.
class Scenario {
public:
  /// Throws ValidationError listing every violated invariant.
  explicit Scenario(ScenarioSpec spec);

  const ScenarioSpec& spec() const noexcept { return spec_; }
  std::int64_t demand() const noexcept { return spec_.demand; }
  const SensitivityModifiers& modifiers() const noexcept { return spec_.modifiers; }
  const PolicyBounds& policy_bounds() const noexcept { return spec_.policy_bounds; }

  /// Routes with modifiers applied, in catalog order.
  const std::vector<RouteSpec>& routes() const noexcept { return effective_; }
  std::size_t route_count() const noexcept { return effective_.size(); }

  std::optional<std::size_t> index_of(const std::string& route_id) const;
  /// Throws InvalidAllocation for an unknown id.
  const RouteSpec& route(const std::string& route_id) const;

  /// Capacity of a route, or demand when unlimited.
  std::int64_t capacity(std::size_t index) const;
  Money fixed_cost(const std::string& technology_id) const;

  /// True when the follower problem is a pure per-unit-linear allocation:
  /// no positive activation costs and no capacity below demand.
  bool is_pure_linear() const;

  bool operator==(const Scenario& o) const { return spec_ == o.spec_; }

private:
  ScenarioSpec spec_;
  std::vector<RouteSpec> effective_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Units sent down each route. Zero entries are dropped.
class Allocation {
public:
  Allocation() = default;
  /// Validating constructor: ids known, units >= 0, sum == demand, capacities.
  Allocation(const Scenario& scenario, std::map<std::string, std::int64_t> units);
  /// No validation; evaluation functions check validity on use.
  static Allocation unchecked(std::map<std::string, std::int64_t> units);
  static Allocation all_on(const Scenario& scenario, const std::string& route_id);

  const std::map<std::string, std::int64_t>& units() const noexcept { return units_; }
  std::int64_t at(const std::string& route_id) const;
  std::int64_t total() const;

  bool operator==(const Allocation&) const = default;

private:
  std::map<std::string, std::int64_t> units_;
};

/// Throws InvalidAllocation describing the first problem found.
void validate_allocation(const Scenario& scenario, const Allocation& allocation);

/// The leader's decision. Subsidy rates are per unit on a route.
struct PolicyVector {
  double tax_rate = 0.0;  // currency / kg-CO2e
  std::map<std::string, Money> subsidy_rates;

  Money subsidy(const std::string& route_id) const;
  static PolicyVector zero() { return {}; }

  bool operator==(const PolicyVector&) const = default;
};

/// Throws InvalidPolicy for negative rates or subsidies on non-subsidizable routes.
void validate_policy(const Scenario& scenario, const PolicyVector& policy);

/// The follower's response and its accounting totals.
struct LowerResult {
  Allocation allocation;
  Money industry_cost;
  double total_emissions = 0.0;
  double circularity_index = 0.0;  // 0 for an empty scenario
  Money subsidy_outlay;
  Money tax_payment;
};

/// Per-unit carbon tax on a route, rounded to the currency tick.
Money unit_tax(const RouteSpec& route, double tax_rate);

double evaluate_emissions(const Scenario& scenario, const Allocation& allocation);
Money evaluate_subsidy(const Scenario& scenario, const Allocation& allocation,
                       const PolicyVector& policy);
Money evaluate_tax(const Scenario& scenario, const Allocation& allocation,
                   const PolicyVector& policy);
/// Net follower cost; negative values are a net profit increase.
Money evaluate_cost(const Scenario& scenario, const Allocation& allocation,
                    const PolicyVector& policy);
/// Allocation-weighted mean circularity. Throws UndefinedIndex when demand is 0.
double evaluate_circularity(const Scenario& scenario, const Allocation& allocation);

LowerResult make_lower_result(const Scenario& scenario, const PolicyVector& policy,
                              const Allocation& allocation);

/// Same scenario with a different washing distance and glass loss fraction.
Scenario apply_modifiers(const Scenario& scenario, double distance, double loss);

}  // namespace circpolicy
