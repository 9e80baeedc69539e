#include "circpolicy/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string_view>

namespace circpolicy {

namespace {

const RouteSpec& least_cost_route(const Scenario& scenario) {
  if (scenario.route_count() == 0) {
    throw PreconditionViolated("scenario has no routes");
  }
  const RouteSpec* best = &scenario.routes().front();
  for (const auto& r : scenario.routes()) {
    if (r.unit_cost < best->unit_cost ||
        (r.unit_cost == best->unit_cost && r.route_id < best->route_id)) {
      best = &r;
    }
  }
  return *best;
}

// Drops binary noise from divisions such as 64.24 / 1000.
double tidy(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(8);
  os << v;
  return os.str();
}

}  // namespace

double tax_threshold(const Scenario& scenario, const std::string& from, const std::string& to) {
  const auto& a = scenario.route(from);
  const auto& b = scenario.route(to);
  const Money dc = b.unit_cost - a.unit_cost;
  if (dc <= Money{}) {
    return 0.0;
  }
  const double de = a.unit_emissions - b.unit_emissions;
  if (!(de > 0.0)) {
    throw NoThreshold("route " + to + " does not emit less than " + from +
                      "; no carbon tax makes it preferred");
  }
  return dc.to_double() / de;
}

Money subsidy_threshold(const Scenario& scenario, const std::string& target) {
  const auto& t = scenario.route(target);
  return max(Money{}, t.unit_cost - least_cost_route(scenario).unit_cost);
}

double TaxBudgetLine::tax_at(Money budget) const {
  if (budget >= kink) {
    return 0.0;
  }
  return std::max(0.0, intercept + slope * budget.to_double());
}

TaxBudgetLine tax_budget_line(const Scenario& scenario, const std::string& target) {
  const Money gap = subsidy_threshold(scenario, target);
  if (gap <= Money{}) {
    return {};
  }
  const double e_least =
      static_cast<double>(scenario.demand()) * least_cost_route(scenario).unit_emissions;
  if (!(e_least > 0.0)) {
    throw NoThreshold("least-cost route emits nothing; a tax raises no revenue");
  }
  const Money kink = gap * scenario.demand();
  return {-1.0 / e_least, kink.to_double() / e_least, kink};
}

double min_tax_for_target(const Scenario& scenario, const std::string& target, Money budget) {
  const auto& t = scenario.route(target);
  const double n = static_cast<double>(scenario.demand());
  const double b = budget.to_double();
  double tax = 0.0;

  if (!t.subsidizable) {
    // No subsidy: tax alone must make the target weakly cheapest.
    for (const auto& r : scenario.routes()) {
      if (r.route_id != target) {
        tax = std::max(tax, tax_threshold(scenario, r.route_id, target));
      }
    }
    if (b + tax * n * t.unit_emissions < 0.0) {
      if (!(t.unit_emissions > 0.0)) {
        throw NoThreshold("negative budget cannot be covered by tax on " + target);
      }
      tax = std::max(tax, -b / (n * t.unit_emissions));
    }
    return tax;
  }

  if (b < 0.0) {
    if (!(t.unit_emissions > 0.0)) {
      throw NoThreshold("negative budget cannot be covered by tax on " + target);
    }
    tax = std::max(tax, -b / (n * t.unit_emissions));
  }
  for (const auto& r : scenario.routes()) {
    if (r.route_id == target) {
      continue;
    }
    const double need = n * (t.unit_cost - r.unit_cost).to_double() - b;
    if (need <= 0.0) {
      continue;
    }
    if (!(r.unit_emissions > 0.0)) {
      throw NoThreshold("competitor " + r.route_id + " emits nothing; tax cannot fund " + target);
    }
    tax = std::max(tax, need / (n * r.unit_emissions));
  }
  return tax;
}

FixedTaxPoint required_budget_for_fixed_tax(const Scenario& scenario, const std::string& target,
                                            double tax_rate) {
  if (!(tax_rate >= 0.0) || !std::isfinite(tax_rate)) {
    throw PreconditionViolated("tax rate must be finite and >= 0");
  }
  const auto& t = scenario.route(target);
  const auto& least = least_cost_route(scenario);
  const std::int64_t n = scenario.demand();
  const double gap = subsidy_threshold(scenario, target).to_double();
  const double rate = std::max(0.0, gap - tax_rate * (least.unit_emissions - t.unit_emissions));

  FixedTaxPoint out;
  out.tax_income = unit_tax(t, tax_rate) * n;
  out.subsidy_outlay = Money::from_double(rate * static_cast<double>(n));
  out.budget = max(Money{}, Money::from_double(static_cast<double>(n) *
                                               (gap - tax_rate * least.unit_emissions)));
  return out;
}

std::string to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::SubsidyOnly:
      return "subsidy-only";
    case SweepMode::TaxOnly:
      return "tax-only";
    case SweepMode::Combined:
      return "combined";
  }
  return "combined";
}

SweepMode parse_mode(std::string_view text) {
  if (text == "subsidy-only") {
    return SweepMode::SubsidyOnly;
  }
  if (text == "tax-only") {
    return SweepMode::TaxOnly;
  }
  if (text == "combined") {
    return SweepMode::Combined;
  }
  throw PreconditionViolated("unknown mode '" + std::string(text) +
                             "' (expected subsidy-only, tax-only or combined)");
}

std::vector<Bound> bounds_for_mode(const Scenario& scenario, SweepMode mode) {
  auto bounds = PolicySpace::default_bounds(scenario);
  if (mode == SweepMode::SubsidyOnly) {
    bounds[0] = {0.0, 0.0};
  } else if (mode == SweepMode::TaxOnly) {
    for (std::size_t i = 1; i < bounds.size(); ++i) {
      bounds[i] = {0.0, 0.0};
    }
  }
  return bounds;
}

std::vector<SweepRecord> budget_sweep(const Scenario& scenario, UpperObjective objective,
                                      const std::vector<Money>& budgets, SweepMode mode,
                                      const PsoParams& params) {
  PsoParams run = params;
  if (run.bounds.empty()) {
    run.bounds = bounds_for_mode(scenario, mode);
  } else if (mode == SweepMode::SubsidyOnly) {
    run.bounds.at(0) = {0.0, 0.0};
  } else if (mode == SweepMode::TaxOnly) {
    for (std::size_t i = 1; i < run.bounds.size(); ++i) {
      run.bounds[i] = {0.0, 0.0};
    }
  }

  std::vector<SweepRecord> out;
  out.reserve(budgets.size());
  for (const Money budget : budgets) {
    SweepRecord rec;
    rec.budget = budget;
    try {
      const auto o = optimize(scenario, objective, budget, run);
      rec.policy = o.best_policy;
      rec.tax_rate = o.best_policy.tax_rate;
      rec.tax_income = o.response.tax_payment;
      rec.subsidy_outlay = o.response.subsidy_outlay;
      rec.upper_value = o.upper_value;
      rec.units = o.response.allocation.units();
      rec.industry_cost = o.response.industry_cost;
      rec.emissions = o.response.total_emissions;
      rec.circularity = o.response.circularity_index;
      rec.feasible = o.feasible;
      std::int64_t most = -1;
      for (const auto& [id, k] : rec.units) {
        if (k > most) {
          most = k;
          rec.selected_route = id;
        }
      }
    } catch (const Error& e) {
      rec.error = e.what();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw PreconditionViolated("fit_line: x and y differ in length");
  }
  const std::size_t n = x.size();
  if (n < 2) {
    return {0.0, n == 1 ? y[0] : 0.0};
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    a(static_cast<Eigen::Index>(i), 0) = x[i];
    a(static_cast<Eigen::Index>(i), 1) = 1.0;
    b(static_cast<Eigen::Index>(i)) = y[i];
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  return {c(0), c(1)};
}

namespace {

SensitivityLevel summarize(double parameter, std::vector<SweepRecord> records) {
  SensitivityLevel level;
  level.parameter = parameter;
  level.records = std::move(records);

  std::map<std::string, std::size_t> votes;
  std::vector<std::string> order;
  for (const auto& r : level.records) {
    if (r.error || !r.feasible) {
      continue;
    }
    if (votes[r.selected_route]++ == 0) {
      order.push_back(r.selected_route);
    }
  }
  std::size_t most = 0;
  for (const auto& id : order) {
    if (votes[id] > most) {
      most = votes[id];
      level.pathway = id;
    }
  }

  std::vector<double> b, tax, income, subsidy, cost;
  for (const auto& r : level.records) {
    if (r.error || !r.feasible || r.selected_route != level.pathway) {
      continue;
    }
    b.push_back(r.budget.to_double());
    tax.push_back(r.tax_rate);
    income.push_back(r.tax_income.to_double());
    subsidy.push_back(r.policy.subsidy(level.pathway).to_double());
    cost.push_back(r.industry_cost.to_double());
  }
  level.tax_rate_slope = fit_line(b, tax).slope;
  level.tax_income_slope = fit_line(b, income).slope;
  level.subsidy_slope = fit_line(b, subsidy).slope;
  level.industry_cost_slope = fit_line(b, cost).slope;
  return level;
}

}  // namespace

std::vector<SensitivityLevel> sensitivity_distance(const Scenario& scenario,
                                                   UpperObjective objective,
                                                   const std::vector<double>& distances,
                                                   const std::vector<Money>& budgets,
                                                   const PsoParams& params, SweepMode mode) {
  std::vector<SensitivityLevel> out;
  for (double d : distances) {
    const Scenario s = apply_modifiers(scenario, d, scenario.modifiers().glass_loss_fraction);
    out.push_back(summarize(d, budget_sweep(s, objective, budgets, mode, params)));
  }
  return out;
}

std::vector<SensitivityLevel> sensitivity_loss(const Scenario& scenario, UpperObjective objective,
                                               const std::vector<double>& losses,
                                               const std::vector<Money>& budgets,
                                               const PsoParams& params, SweepMode mode) {
  std::vector<SensitivityLevel> out;
  for (double l : losses) {
    const Scenario s = apply_modifiers(scenario, scenario.modifiers().glass_wash_distance, l);
    out.push_back(summarize(l, budget_sweep(s, objective, budgets, mode, params)));
  }
  return out;
}

namespace {

struct Placeholder {
  const char* route;
  const char* product;
  const char* technology;
  std::vector<std::string> outputs;
  double cost;
  double emissions;
  double circularity;
};

// Worse than every calibrated pathway on cost, emissions and circularity at
// any studied distance and loss.
const std::vector<Placeholder>& placeholders() {
  static const std::vector<Placeholder> list{
      {"incineration", "multilayer-bag", "incineration", {"electricity"}, 0.41, 0.121, 0.35},
      {"mechanical-recycling", "multilayer-bag", "mechanical-recycling", {"mixed-polyolefin"},
       0.47, 0.128, 1.05},
      {"pyrolysis", "multilayer-bag", "pyrolysis", {"pyrolysis-oil"}, 0.53, 0.135, 0.9},
      {"monolayer-landfill", "monolayer-film", "landfill", {}, 0.44, 0.124, 0.6},
      {"rigid-plastic-recycling", "rigid-plastic-container", "mechanical-recycling",
       {"recycled-pp"}, 0.58, 0.142, 1.1},
  };
  return list;
}

}  // namespace

Scenario calibrate_case_study(const CalibrationAnchors& a) {
  std::vector<std::string> issues;
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) {
      issues.push_back(what);
    }
  };

  require(a.demand >= 1, "demand must be at least 1");
  const double n = static_cast<double>(std::max<std::int64_t>(a.demand, 1));
  const double c_s = tidy(a.least_cost_total / n);
  const double e_s = tidy(a.emissions_strap / n);
  const double e_l = tidy(a.emissions_landfill / n);
  const double e_g = tidy(a.emissions_glass / n);
  const double c_l = c_s + a.subsidy_landfill;
  const double c_g = c_s + a.subsidy_glass;

  require(e_s > 0.0 && e_l > 0.0 && e_g > 0.0, "route emissions must be positive");
  require(e_l < e_s, "landfill must emit less than strap for a tax threshold to exist (" +
                         fmt(a.emissions_landfill) + " >= " + fmt(a.emissions_strap) + ")");
  if (e_l < e_s) {
    const double threshold = a.subsidy_landfill / (e_s - e_l);
    require(std::abs(threshold - a.reported_tax_threshold) <= 0.02 * a.reported_tax_threshold,
            "tax threshold " + fmt(threshold) + " is not within 2% of " +
                fmt(a.reported_tax_threshold));
  }
  require(e_g < e_s, "glass washing must emit less than strap");
  require(e_l < e_g, "landfill must be the lowest-emitting route at the reference distance");
  require(a.subsidy_landfill > 0.0 && a.subsidy_glass > a.subsidy_landfill,
          "subsidy thresholds must satisfy 0 < landfill < glass washing");
  for (auto [name, ci] : {std::pair{"strap", a.circularity_strap},
                          std::pair{"landfill", a.circularity_landfill},
                          std::pair{"glass washing", a.circularity_glass}}) {
    require(ci >= 0.0 && ci <= 2.0, std::string(name) + " circularity must lie in [0, 2]");
  }
  require(a.circularity_glass > a.circularity_strap && a.circularity_glass > a.circularity_landfill,
          "glass washing must be the most circular route");
  require(0.0 <= a.nearest_distance && a.nearest_distance < a.crossover_low_distance &&
              a.crossover_low_distance < a.reference_distance,
          "distances must satisfy 0 <= nearest < crossover low < reference");
  require(0.0 <= a.low_loss && a.low_loss < a.reference_loss && a.reference_loss < a.high_loss &&
              a.high_loss < 1.0,
          "losses must satisfy 0 <= low < reference < high < 1");
  require(a.no_subsidy_budget_low_loss < 0.0, "no-subsidy budget at low loss must be negative");
  if (!issues.empty()) {
    throw CalibrationError(issues);
  }

  // Distance: emissions crossover at the midpoint of (crossover low, reference);
  // cost slope at half the bound keeping landfill cheaper at the nearest distance.
  const double crossover = 0.5 * (a.crossover_low_distance + a.reference_distance);
  const double ke = (e_g - e_l) / (a.reference_distance - crossover);
  const double kc = 0.5 * (c_g - c_l) / (a.reference_distance - a.nearest_distance);

  // Loss: emissions slope at the midpoint of the interval where glass beats
  // landfill at low loss, out-emits strap at high loss, and keeps a
  // nonnegative base value.
  const double span_low = a.reference_loss - a.low_loss;
  const double kl_lo =
      std::max((e_g - e_l) / span_low, (e_s - e_g) / (a.high_loss - a.reference_loss));
  const double kl_hi = (e_g - ke * a.reference_distance) / a.reference_loss;
  require(kl_lo < kl_hi, "no loss emission coefficient satisfies the loss crossover (" +
                             fmt(kl_lo) + " >= " + fmt(kl_hi) + ")");
  const double kl = 0.5 * (kl_lo + kl_hi);

  // Loss cost slope: at low loss glass needs no subsidy once the budget
  // falls below the anchor, and sits between strap and landfill in cost.
  const double e_g_low = e_g - kl * span_low;
  const double de_low = e_s - e_g_low;
  require(e_g_low > 0.0 && de_low > 0.0, "low-loss glass emissions must lie in (0, strap)");
  const double dc_low = -a.no_subsidy_budget_low_loss * de_low / (n * e_g_low);
  const double lc = (c_g - (c_s + dc_low)) / span_low;
  const double lc_lo = (c_g - c_l) / span_low;
  const double lc_hi = (c_g - c_s) / span_low;
  require(lc > lc_lo && lc < lc_hi, "loss cost coefficient " + fmt(lc) + " outside (" +
                                        fmt(lc_lo) + ", " + fmt(lc_hi) + ")");
  if (!issues.empty()) {
    throw CalibrationError(issues);
  }

  ScenarioSpec spec;
  spec.name = "coffee-packaging";
  spec.demand = a.demand;
  spec.modifiers.glass_wash_distance = a.reference_distance;
  spec.modifiers.glass_loss_fraction = a.reference_loss;
  spec.modifiers.distance_cost_coeff = kc;
  spec.modifiers.distance_emission_coeff = ke;
  spec.modifiers.loss_cost_coeff = lc;
  spec.modifiers.loss_emission_coeff = kl;
  spec.modifiers.affected_route_ids = {kGlassRoute};

  RouteSpec strap;
  strap.route_id = kStrapRoute;
  strap.product_id = "multilayer-bag";
  strap.technology_id = "strap";
  strap.recovered_outputs = {"recycled-pe", "recycled-al", "recycled-pet"};
  strap.unit_cost = Money::from_double(c_s);
  strap.unit_emissions = e_s;
  strap.unit_circularity = a.circularity_strap;

  RouteSpec landfill;
  landfill.route_id = kLandfillRoute;
  landfill.product_id = "multilayer-bag";
  landfill.technology_id = "landfill";
  landfill.unit_cost = strap.unit_cost + Money::from_double(a.subsidy_landfill);
  landfill.unit_emissions = e_l;
  landfill.unit_circularity = a.circularity_landfill;
  landfill.subsidizable = true;

  RouteSpec glass;
  glass.route_id = kGlassRoute;
  glass.product_id = "glass-jar";
  glass.technology_id = "glass-washing";
  glass.recovered_outputs = {"washed-glass-jar"};
  glass.unit_cost = strap.unit_cost + Money::from_double(a.subsidy_glass) -
                    Money::from_double(kc * a.reference_distance) -
                    Money::from_double(lc * a.reference_loss);
  glass.unit_emissions = e_g - ke * a.reference_distance - kl * a.reference_loss;
  glass.unit_circularity = a.circularity_glass;
  glass.subsidizable = true;

  spec.routes = {strap, landfill, glass};
  for (const auto& p : placeholders()) {
    RouteSpec r;
    r.route_id = p.route;
    r.product_id = p.product;
    r.technology_id = p.technology;
    r.recovered_outputs = p.outputs;
    r.unit_cost = Money::from_double(p.cost);
    r.unit_emissions = p.emissions;
    r.unit_circularity = p.circularity;
    r.dominated = true;
    spec.routes.push_back(std::move(r));
  }
  return Scenario(std::move(spec));
}

std::vector<std::pair<std::string, double>> anchor_residuals(const Scenario& scenario,
                                                             const CalibrationAnchors& a) {
  const PolicyVector zero;
  auto all_on = [&](const char* id) { return Allocation::all_on(scenario, id); };
  std::vector<std::pair<std::string, double>> out;
  out.emplace_back("least_cost_total",
                   evaluate_cost(scenario, all_on(kStrapRoute), zero).to_double() -
                       a.least_cost_total);
  out.emplace_back("emissions_strap",
                   evaluate_emissions(scenario, all_on(kStrapRoute)) - a.emissions_strap);
  out.emplace_back("emissions_landfill",
                   evaluate_emissions(scenario, all_on(kLandfillRoute)) - a.emissions_landfill);
  out.emplace_back("emissions_glass",
                   evaluate_emissions(scenario, all_on(kGlassRoute)) - a.emissions_glass);
  out.emplace_back("circularity_strap",
                   evaluate_circularity(scenario, all_on(kStrapRoute)) - a.circularity_strap);
  out.emplace_back("circularity_landfill", evaluate_circularity(scenario, all_on(kLandfillRoute)) -
                                               a.circularity_landfill);
  out.emplace_back("circularity_glass",
                   evaluate_circularity(scenario, all_on(kGlassRoute)) - a.circularity_glass);
  out.emplace_back("subsidy_landfill",
                   subsidy_threshold(scenario, kLandfillRoute).to_double() - a.subsidy_landfill);
  out.emplace_back("subsidy_glass",
                   subsidy_threshold(scenario, kGlassRoute).to_double() - a.subsidy_glass);
  out.emplace_back("tax_threshold", tax_threshold(scenario, kStrapRoute, kLandfillRoute) -
                                        a.reported_tax_threshold);
  return out;
}

}  // namespace circpolicy
