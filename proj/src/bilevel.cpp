#include "circpolicy/bilevel.hpp"

#include <algorithm>
#include <cmath>

namespace circpolicy {

PolicySpace::PolicySpace(const Scenario& scenario, std::vector<Bound> bounds) {
  for (const auto& r : scenario.routes()) {
    if (r.subsidizable) {
      routes_.push_back(r.route_id);
    }
  }
  bounds_ = bounds.empty() ? default_bounds(scenario) : std::move(bounds);
  if (bounds_.size() != routes_.size() + 1) {
    throw PreconditionViolated("policy space expects " + std::to_string(routes_.size() + 1) +
                               " bounds, got " + std::to_string(bounds_.size()));
  }
  for (const auto& b : bounds_) {
    if (!(b.lo <= b.hi) || b.lo < 0.0) {
      throw PreconditionViolated("policy bounds must satisfy 0 <= lo <= hi");
    }
  }
}

std::vector<Bound> PolicySpace::default_bounds(const Scenario& scenario) {
  std::vector<Bound> out{{0.0, scenario.policy_bounds().max_tax}};
  for (const auto& r : scenario.routes()) {
    if (r.subsidizable) {
      out.push_back({0.0, scenario.policy_bounds().max_subsidy});
    }
  }
  return out;
}

PolicyVector PolicySpace::to_policy(const Eigen::VectorXd& point) const {
  PolicyVector p;
  p.tax_rate = std::max(0.0, point(0));
  for (std::size_t i = 0; i < routes_.size(); ++i) {
    const Money rate = Money::from_double(std::max(0.0, point(static_cast<Eigen::Index>(i + 1))));
    if (rate > Money{}) {
      p.subsidy_rates[routes_[i]] = rate;
    }
  }
  return p;
}

Eigen::VectorXd PolicySpace::to_point(const PolicyVector& policy) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(dimension()));
  x(0) = policy.tax_rate;
  for (std::size_t i = 0; i < routes_.size(); ++i) {
    x(static_cast<Eigen::Index>(i + 1)) = policy.subsidy(routes_[i]).to_double();
  }
  return x;
}

Eigen::VectorXd PolicySpace::clip(const Eigen::VectorXd& point) const {
  Eigen::VectorXd x = point;
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    auto k = static_cast<Eigen::Index>(i);
    x(k) = std::clamp(x(k), bounds_[i].lo, bounds_[i].hi);
  }
  return x;
}

PolicyEvaluation evaluate_policy(const Scenario& scenario, const PolicyVector& policy,
                                 UpperObjective objective, Money budget, double penalty_weight) {
  validate_policy(scenario, policy);
  PolicyEvaluation out;
  if (scenario.is_pure_linear()) {
    const auto greedy = solve_lower_greedy(scenario, policy);
    const auto pick = optimistic_select(scenario, policy, greedy.tie, objective, budget);
    out.response = make_lower_result(scenario, policy, pick.allocation);
  } else {
    out.response = solve_lower_milp(scenario, policy);
  }
  const Money funds = budget + out.response.tax_payment;
  const Money violation = out.response.subsidy_outlay - funds;
  out.feasible = violation <= Money{};
  out.funds_violation = out.feasible ? Money{} : violation;
  out.upper_value = upper_value(out.response, objective);
  out.score = minimization_form(out.upper_value, objective) +
              penalty_weight * out.funds_violation.to_double();
  return out;
}

Fitness rank(const PolicyEvaluation& evaluation, const PolicyVector& policy) {
  double subsidy_sum = 0.0;
  for (const auto& [id, rate] : policy.subsidy_rates) {
    subsidy_sum += rate.to_double();
  }
  // Tax differences below 1e-7 are rounding noise; let the subsidy total decide.
  const double tax = std::round(policy.tax_rate * 1e7) / 1e7;
  return {evaluation.feasible ? 0 : 1, evaluation.score, tax, subsidy_sum};
}

std::vector<PolicyVector> domain_initial_points(const Scenario& scenario) {
  std::vector<PolicyVector> out{PolicyVector::zero()};
  Money cheapest = scenario.routes().front().unit_cost;
  for (const auto& r : scenario.routes()) {
    cheapest = min(cheapest, r.unit_cost);
  }
  for (const auto& r : scenario.routes()) {
    if (!r.subsidizable) {
      continue;
    }
    PolicyVector p;
    const Money gap = max(Money{}, r.unit_cost - cheapest);
    if (gap > Money{}) {
      p.subsidy_rates[r.route_id] = gap;
    }
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

/// Cheapest instruments (tax first, then total subsidy) that keep every route
/// carrying units in `allocation` among the follower's optimal routes while
/// covering their outlay. Candidates nudge the tax upward so that per-unit
/// rounding cannot tip the result across either boundary.
std::vector<PolicyVector> sustaining_policies(const Scenario& scenario, const PolicySpace& space,
                                              const Allocation& allocation, Money budget) {
  const auto& routes = scenario.routes();
  const auto& subsidized = space.subsidized_routes();
  const auto dim = static_cast<Eigen::Index>(space.dimension());
  auto column_of = [&](const std::string& id) -> Eigen::Index {
    auto it = std::find(subsidized.begin(), subsidized.end(), id);
    return it == subsidized.end() ? -1 : 1 + (it - subsidized.begin());
  };

  auto lp = LinearProgram<double>::with_variables(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    lp.lower(j) = space.bounds()[static_cast<std::size_t>(j)].lo;
    lp.upper(j) = space.bounds()[static_cast<std::size_t>(j)].hi;
    lp.objective(j) = j == 0 ? 1.0 : 1e-6;
  }
  Eigen::VectorXd funds = Eigen::VectorXd::Zero(dim);
  for (const auto& [id, k] : allocation.units()) {
    const auto& carried = scenario.route(id);
    const Eigen::Index own = column_of(id);
    for (const auto& other : routes) {
      if (other.route_id == id) {
        continue;
      }
      Eigen::VectorXd row = Eigen::VectorXd::Zero(dim);
      row(0) = carried.unit_emissions - other.unit_emissions;
      if (own >= 0) {
        row(own) -= 1.0;
      }
      if (const Eigen::Index col = column_of(other.route_id); col >= 0) {
        row(col) += 1.0;
      }
      lp.add_constraint(row, Relation::LessEqual,
                        (other.unit_cost - carried.unit_cost).to_double());
    }
    const double units = static_cast<double>(k);
    funds(0) -= units * carried.unit_emissions;
    if (own >= 0) {
      funds(own) += units;
    }
  }
  lp.add_constraint(funds, Relation::LessEqual, budget.to_double());

  const auto sol = simplex_solve(lp);
  if (sol.status != LpStatus::Optimal) {
    return {};
  }
  std::vector<PolicyVector> out;
  for (double nudge : {0.0, 1e-9, 1e-8, 1e-7, 1e-6}) {
    Eigen::VectorXd x = sol.x;
    x(0) += nudge;
    out.push_back(space.to_policy(space.clip(x)));
  }
  return out;
}

}  // namespace

BilevelOutcome optimize(const Scenario& scenario, UpperObjective objective, Money budget,
                        const PsoParams& params, const OptimizeOptions& options) {
  std::vector<Bound> bounds =
      params.bounds.empty() ? PolicySpace::default_bounds(scenario) : params.bounds;
  if (objective == UpperObjective::MostProfitable) {
    // Diagnostic mode: the follower's own optimum under no policy.
    std::fill(bounds.begin(), bounds.end(), Bound{0.0, 0.0});
  }
  const PolicySpace space(scenario, std::move(bounds));
  PsoParams run = params;
  run.bounds = space.bounds();

  std::vector<Eigen::VectorXd> starts;
  for (const auto& p : options.initial_points) {
    starts.push_back(space.clip(space.to_point(p)));
  }
  const auto domain = domain_initial_points(scenario);
  starts.push_back(space.clip(space.to_point(domain.front())));
  if (options.pathway_seeds && scenario.is_pure_linear() && scenario.demand() > 0) {
    for (const auto& r : scenario.routes()) {
      const auto seeds =
          sustaining_policies(scenario, space, Allocation::all_on(scenario, r.route_id), budget);
      if (!seeds.empty()) {
        starts.push_back(space.clip(space.to_point(seeds[2])));
      }
    }
  }
  for (std::size_t i = 1; i < domain.size(); ++i) {
    starts.push_back(space.clip(space.to_point(domain[i])));
  }
  // The zero policy always gets a slot.
  if (starts.size() > run.swarm_size) {
    starts.resize(run.swarm_size);
    if (options.initial_points.size() >= run.swarm_size) {
      starts.back() = space.clip(space.to_point(domain.front()));
    }
  }

  auto evaluate = [&](const Eigen::VectorXd& x) {
    const PolicyVector policy = space.to_policy(x);
    return rank(evaluate_policy(scenario, policy, objective, budget, options.penalty_weight),
                policy);
  };
  const PsoResult pso = pso_run(evaluate, run, std::span<const Eigen::VectorXd>(starts));

  BilevelOutcome out;
  out.best_policy = space.to_policy(pso.best);
  out.trace = pso.trace;
  out.evaluations = pso.evaluations;
  auto eval = evaluate_policy(scenario, out.best_policy, objective, budget, options.penalty_weight);

  if (options.polish && scenario.is_pure_linear() && scenario.demand() > 0) {
    Fitness best = rank(eval, out.best_policy);
    bool improved = false;
    auto subsidy_total = [](const PolicyVector& p) {
      Money t;
      for (const auto& [id, rate] : p.subsidy_rates) {
        t += rate;
      }
      return t;
    };
    // Exact tie-break below the rank's tax resolution.
    auto better = [&](const Fitness& f, const PolicyVector& p) {
      if (f != best) {
        return f < best;
      }
      return std::pair{p.tax_rate, subsidy_total(p)} <
             std::pair{out.best_policy.tax_rate, subsidy_total(out.best_policy)};
    };
    auto candidates = sustaining_policies(scenario, space, eval.response.allocation, budget);
    PolicyVector trimmed = out.best_policy;
    std::erase_if(trimmed.subsidy_rates, [&](const auto& kv) {
      return eval.response.allocation.at(kv.first) == 0;
    });
    candidates.push_back(std::move(trimmed));
    for (const auto& candidate : candidates) {
      auto e = evaluate_policy(scenario, candidate, objective, budget, options.penalty_weight);
      ++out.evaluations;
      const Fitness f = rank(e, candidate);
      if (better(f, candidate)) {
        best = f;
        out.best_policy = candidate;
        eval = std::move(e);
        improved = true;
      }
    }
    if (improved) {
      out.trace.push_back({out.trace.size(), best.value, best.tier == 0});
    }
  }

  out.response = eval.response;
  out.upper_value = eval.upper_value;
  out.feasible = eval.feasible;
  return out;
}

}  // namespace circpolicy
