#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "circpolicy/lower_solver.hpp"
#include "circpolicy/model.hpp"
#include "circpolicy/objective.hpp"
#include "circpolicy/pso.hpp"

namespace circpolicy {

/// Coordinates of the leader's search: dimension 0 is the tax rate, then one
/// subsidy rate per subsidizable route in catalog order.
class PolicySpace {
public:
  /// Empty `bounds` selects the scenario's policy bounds.
  PolicySpace(const Scenario& scenario, std::vector<Bound> bounds = {});

  static std::vector<Bound> default_bounds(const Scenario& scenario);

  std::size_t dimension() const noexcept { return bounds_.size(); }
  const std::vector<Bound>& bounds() const noexcept { return bounds_; }
  const std::vector<std::string>& subsidized_routes() const noexcept { return routes_; }

  PolicyVector to_policy(const Eigen::VectorXd& point) const;
  Eigen::VectorXd to_point(const PolicyVector& policy) const;
  Eigen::VectorXd clip(const Eigen::VectorXd& point) const;

private:
  std::vector<std::string> routes_;
  std::vector<Bound> bounds_;
};

struct PolicyEvaluation {
  double upper_value = 0.0;  // natural units
  double score = 0.0;        // minimization form, penalty included
  LowerResult response;
  bool feasible = true;
  Money funds_violation;     // outlay - (budget + tax income), if positive
};

inline constexpr double kDefaultPenaltyWeight = 1e4;

/// Fixes the leader's instruments and solves the follower exactly: greedy plus
/// budget-aware optimistic tie-breaking on pure-linear scenarios, branch-and-bound
/// otherwise. Infeasible policies score objective + penalty_weight * violation.
PolicyEvaluation evaluate_policy(const Scenario& scenario, const PolicyVector& policy,
                                 UpperObjective objective, Money budget,
                                 double penalty_weight = kDefaultPenaltyWeight);

/// Lexicographic ranking used by the leader search and the grid oracle:
/// feasible first, then objective, then the smaller tax rate (to 1e-7), then the
/// smaller total subsidy rate.
Fitness rank(const PolicyEvaluation& evaluation, const PolicyVector& policy);

struct BilevelOutcome {
  PolicyVector best_policy;
  LowerResult response;
  double upper_value = 0.0;
  bool feasible = false;
  std::vector<TracePoint> trace;
  std::size_t evaluations = 0;
};

/// Zero policy first, then for every subsidizable route the subsidy that makes
/// it cost-indifferent with the cheapest route at zero tax.
std::vector<PolicyVector> domain_initial_points(const Scenario& scenario);

struct OptimizeOptions {
  std::vector<PolicyVector> initial_points;  // tried before the domain points
  double penalty_weight = kDefaultPenaltyWeight;
  /// After the swarm, solve a small LP for the cheapest instruments that
  /// sustain the best response found, and keep them if they rank better.
  bool polish = true;
  /// Also seed the swarm with, for every route, the LP-cheapest policy that
  /// makes it the follower's sole choice within funds (pure-linear scenarios).
  bool pathway_seeds = true;
};

/// Particle swarm over the leader's instruments with exact follower responses.
/// The caller's points, the zero policy, the pathway seeds and the domain
/// initial points seed every restart, in that order.
BilevelOutcome optimize(const Scenario& scenario, UpperObjective objective, Money budget,
                        const PsoParams& params, const OptimizeOptions& options = {});

}  // namespace circpolicy
