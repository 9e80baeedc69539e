#pragma once

#include <map>
#include <string>
#include <vector>

#include "circpolicy/bilevel.hpp"
#include "circpolicy/model.hpp"

namespace circpolicy {

struct Enumeration {
  Money optimum;
  std::vector<Allocation> argmin;  // every composition attaining the optimum
  std::size_t visited = 0;
};

/// Exhaustive follower solve: walks every integer composition of demand over
/// the routes (capacities respected, fixed costs charged per active
/// technology). Throws ResourceBound when there are more than
/// `max_compositions` compositions.
Enumeration enumerate_lower(const Scenario& scenario, const PolicyVector& policy,
                            std::size_t max_compositions = 1'000'000);

/// Number of compositions of `demand` into `parts` nonnegative parts,
/// saturating at `cap + 1`.
std::size_t composition_count(std::int64_t demand, std::size_t parts, std::size_t cap);

struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t steps = 1;  // 1 pins the axis at lo

  double at(std::size_t i) const;
};

struct GridSpec {
  Axis tax;
  std::map<std::string, Axis> subsidies;  // unlisted routes stay at zero
  Money budget;

  static constexpr std::size_t kMaxPoints = 10'000'000;
  std::size_t point_count() const;
};

struct GridResult {
  PolicyVector policy;
  PolicyEvaluation evaluation;
  std::size_t points = 0;
};

/// Evaluates every grid point and keeps the best by rank(); ties keep the
/// earliest point in grid order (tax outermost, subsidy axes by route id).
/// Throws ResourceBound for grids above kMaxPoints and InvalidPolicy for
/// subsidy axes on non-subsidizable routes.
GridResult grid_bilevel(const Scenario& scenario, UpperObjective objective, const GridSpec& grid);

}  // namespace circpolicy
