#pragma once

#include <optional>
#include <string>
#include <vector>

#include "circpolicy/model.hpp"
#include "circpolicy/objective.hpp"
#include "circpolicy/simplex.hpp"

namespace circpolicy {

/// Routes whose net unit cost is within kTieTolerance of the minimum.
inline constexpr Money kTieTolerance = Money::from_ticks(1);

struct TieSet {
  std::vector<std::string> route_ids;  // sorted by id
  Money min_net_cost;
};

struct GreedySolution {
  TieSet tie;
  Allocation allocation;  // all demand on one exactly-minimal route
  Money objective;
};

/// unit_cost + tax_rate * unit_emissions - subsidy.
Money net_unit_cost(const RouteSpec& route, const PolicyVector& policy);

/// Exact follower optimum for pure per-unit-linear scenarios. The canonical
/// allocation places all demand on the id-first route attaining the exact
/// minimum; the tie set lists every route within tolerance of it.
GreedySolution solve_lower_greedy(const Scenario& scenario, const PolicyVector& policy);

struct MilpOptions {
  double absolute_gap = 1e-6;  // currency
  std::size_t max_nodes = 200000;
  SimplexOptions lp;
};

/// Thrown when branch-and-bound exhausts its node budget.
class ResourceLimit : public Error {
public:
  ResourceLimit(const std::string& what, std::optional<LowerResult> incumbent)
      : Error(what), incumbent_(std::move(incumbent)) {}
  const std::optional<LowerResult>& incumbent() const noexcept { return incumbent_; }

private:
  std::optional<LowerResult> incumbent_;
};

/// LP relaxation of the follower problem: route units plus one activation
/// binary per technology carrying a positive fixed cost.
LinearProgram<double> lower_relaxation(const Scenario& scenario, const PolicyVector& policy);

/// Branch-and-bound over lower_relaxation with most-fractional branching and
/// best-bound node selection. Throws Infeasible or ResourceLimit.
LowerResult solve_lower_milp(const Scenario& scenario, const PolicyVector& policy,
                             const MilpOptions& options = {});

struct Selection {
  Allocation allocation;
  bool within_funds = true;
};

/// Leader-favorable choice inside the follower's optimal face.
///
/// All mass goes to routes of the tie set. The funds condition is
/// subsidy outlay <= budget + tax income, where both sides depend on the
/// allocation. Among allocations meeting it, the one best for the leader is
/// returned (at most two routes carry units; the count on the better one is
/// floored). If none meets it, the leader-best single route is returned with
/// within_funds = false.
Selection optimistic_select(const Scenario& scenario, const PolicyVector& policy,
                            const TieSet& tie, UpperObjective objective, Money budget);

}  // namespace circpolicy
