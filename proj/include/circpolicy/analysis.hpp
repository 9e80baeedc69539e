#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "circpolicy/bilevel.hpp"
#include "circpolicy/model.hpp"

namespace circpolicy {

/// Minimal carbon tax at which `to` becomes weakly preferred over `from` with
/// no subsidies. Zero when `to` is already no more expensive. Throws
/// NoThreshold when `to` does not emit strictly less.
double tax_threshold(const Scenario& scenario, const std::string& from, const std::string& to);

/// Per-unit subsidy making `target` cost-indifferent with the cheapest route at zero tax.
Money subsidy_threshold(const Scenario& scenario, const std::string& target);

/// tax(B) = max(0, intercept + slope * B), zero for B >= kink.
struct TaxBudgetLine {
  double slope = 0.0;
  double intercept = 0.0;
  Money kink;
  double tax_at(Money budget) const;
};

/// Closed-form tax-vs-budget line for inducing `target` against the pre-policy
/// least-cost route: tax(B) = (N * gap - B) / E_least, where gap is the
/// subsidy threshold and E_least the least-cost route's total emissions.
/// Degenerate (all zeros) when target is already least-cost.
TaxBudgetLine tax_budget_line(const Scenario& scenario, const std::string& target);

/// Smallest tax rate inducing all demand onto `target` (subsidized alone) with
/// funds covering the outlay, against every competing route:
/// max(0, -B/(N e_T), max_r (N (c_T - c_r) - B) / (N e_r)).
/// Throws NoThreshold when some competitor cannot be overcome at any tax.
double min_tax_for_target(const Scenario& scenario, const std::string& target, Money budget);

struct FixedTaxPoint {
  Money budget;
  Money tax_income;
  Money subsidy_outlay;
};

/// Budget needed to induce `target` when the tax rate is fixed, with the
/// implied tax income (collected on the target route) and subsidy outlay.
FixedTaxPoint required_budget_for_fixed_tax(const Scenario& scenario, const std::string& target,
                                            double tax_rate);

enum class SweepMode { SubsidyOnly, TaxOnly, Combined };

std::string to_string(SweepMode mode);
SweepMode parse_mode(std::string_view text);

/// Search bounds with the axes a mode excludes pinned to zero.
std::vector<Bound> bounds_for_mode(const Scenario& scenario, SweepMode mode);

struct SweepRecord {
  Money budget;
  PolicyVector policy;
  double tax_rate = 0.0;
  Money tax_income;
  Money subsidy_outlay;
  double upper_value = 0.0;
  std::map<std::string, std::int64_t> units;
  Money industry_cost;
  double emissions = 0.0;
  double circularity = 0.0;
  bool feasible = false;
  std::string selected_route;  // route carrying the most units
  std::optional<std::string> error;
};

/// One optimize() per budget, in input order. A failed cell records its error
/// and the sweep continues.
std::vector<SweepRecord> budget_sweep(const Scenario& scenario, UpperObjective objective,
                                      const std::vector<Money>& budgets, SweepMode mode,
                                      const PsoParams& params);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares line through (x, y); zero slope for fewer than two points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct SensitivityLevel {
  double parameter = 0.0;
  std::vector<SweepRecord> records;
  std::string pathway;  // most frequently selected route
  /// Fitted slopes against budget over the feasible records.
  double tax_rate_slope = 0.0;
  double tax_income_slope = 0.0;
  double subsidy_slope = 0.0;
  double industry_cost_slope = 0.0;
};

std::vector<SensitivityLevel> sensitivity_distance(const Scenario& scenario,
                                                   UpperObjective objective,
                                                   const std::vector<double>& distances,
                                                   const std::vector<Money>& budgets,
                                                   const PsoParams& params,
                                                   SweepMode mode = SweepMode::Combined);

std::vector<SensitivityLevel> sensitivity_loss(const Scenario& scenario, UpperObjective objective,
                                               const std::vector<double>& losses,
                                               const std::vector<Money>& budgets,
                                               const PsoParams& params,
                                               SweepMode mode = SweepMode::Combined);

/// Reported constants of the coffee-packaging case study. Emission and cost
/// totals are for `demand` units.
struct CalibrationAnchors {
  std::int64_t demand = 1000;
  double least_cost_total = -0.93;
  double emissions_strap = 64.24;
  double emissions_landfill = 49.97;
  double emissions_glass = 50.08;
  double circularity_strap = 1.275;
  double circularity_glass = 1.475;
  double circularity_landfill = 1.18;
  double subsidy_landfill = 0.061;
  double subsidy_glass = 0.067;
  double reported_tax_threshold = 4.3;

  double reference_distance = 65.0;
  double reference_loss = 0.0313;
  double nearest_distance = 7.0;     // landfill still cheaper than glass here
  double crossover_low_distance = 15.0;  // glass still lowest-emitting here
  double low_loss = 0.01;
  double high_loss = 0.10;
  /// Budget below which the low-loss glass route needs no subsidy.
  double no_subsidy_budget_low_loss = -25.0;
};

/// Route ids of the calibrated pathways.
inline constexpr const char* kStrapRoute = "strap";
inline constexpr const char* kLandfillRoute = "landfill";
inline constexpr const char* kGlassRoute = "glass-washing";

/// Builds the coffee-packaging scenario from the anchors. Throws
/// CalibrationError listing every violated relation.
Scenario calibrate_case_study(const CalibrationAnchors& anchors = {});

/// Differences between what the calibrated scenario reproduces and each anchor.
std::vector<std::pair<std::string, double>> anchor_residuals(const Scenario& scenario,
                                                             const CalibrationAnchors& anchors = {});

}  // namespace circpolicy
