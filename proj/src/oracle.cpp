#include "circpolicy/oracle.hpp"

#include <cmath>
#include <set>

namespace circpolicy {

std::size_t composition_count(std::int64_t demand, std::size_t parts, std::size_t cap) {
  if (parts == 0) {
    return demand == 0 ? 1 : 0;
  }
  // C(demand + parts - 1, parts - 1), built incrementally so each partial
  // product is itself a binomial coefficient.
  const auto n = static_cast<unsigned __int128>(demand);
  unsigned __int128 c = 1;
  for (std::size_t i = 1; i < parts; ++i) {
    c = c * (n + i) / i;
    if (c > cap) {
      return cap + 1;
    }
  }
  return static_cast<std::size_t>(c);
}

Enumeration enumerate_lower(const Scenario& scenario, const PolicyVector& policy,
                            std::size_t max_compositions) {
  validate_policy(scenario, policy);
  const std::size_t r = scenario.route_count();
  const std::int64_t n = scenario.demand();
  if (composition_count(n, r, max_compositions) > max_compositions) {
    throw ResourceBound("enumeration over " + std::to_string(r) + " routes and demand " +
                        std::to_string(n) + " exceeds " + std::to_string(max_compositions) +
                        " compositions");
  }

  std::vector<std::int64_t> net(r), cap(r);
  std::vector<std::size_t> tech(r);
  std::vector<std::int64_t> fixed;
  std::map<std::string, std::size_t> tech_index;
  for (std::size_t i = 0; i < r; ++i) {
    const auto& route = scenario.routes()[i];
    net[i] = (route.unit_cost + unit_tax(route, policy.tax_rate) - policy.subsidy(route.route_id))
                 .ticks();
    cap[i] = scenario.capacity(i);
    auto [it, inserted] = tech_index.emplace(route.technology_id, fixed.size());
    if (inserted) {
      fixed.push_back(scenario.fixed_cost(route.technology_id).ticks());
    }
    tech[i] = it->second;
  }

  Enumeration out;
  bool found = false;
  std::vector<std::int64_t> units(r, 0);
  std::vector<int> active(fixed.size(), 0);

  auto record = [&](__int128 cost) {
    ++out.visited;
    for (std::size_t k = 0; k < fixed.size(); ++k) {
      if (active[k] > 0) {
        cost += fixed[k];
      }
    }
    const auto value = static_cast<std::int64_t>(cost);
    if (found && value > out.optimum.ticks()) {
      return;
    }
    if (!found || value < out.optimum.ticks()) {
      out.argmin.clear();
      out.optimum = Money::from_ticks(value);
      found = true;
    }
    std::map<std::string, std::int64_t> m;
    for (std::size_t i = 0; i < r; ++i) {
      if (units[i] > 0) {
        m[scenario.routes()[i].route_id] = units[i];
      }
    }
    out.argmin.push_back(Allocation::unchecked(std::move(m)));
  };

  // Depth-first over routes; the last route takes the remainder.
  auto walk = [&](auto&& self, std::size_t i, std::int64_t left, __int128 cost) -> void {
    if (i + 1 == r) {
      if (left > cap[i]) {
        return;
      }
      units[i] = left;
      active[tech[i]] += left > 0;
      record(cost + static_cast<__int128>(net[i]) * left);
      active[tech[i]] -= left > 0;
      units[i] = 0;
      return;
    }
    const std::int64_t top = std::min(left, cap[i]);
    for (std::int64_t k = 0; k <= top; ++k) {
      units[i] = k;
      active[tech[i]] += k > 0;
      self(self, i + 1, left - k, cost + static_cast<__int128>(net[i]) * k);
      active[tech[i]] -= k > 0;
    }
    units[i] = 0;
  };

  if (r == 0) {
    if (n != 0) {
      throw Infeasible("no routes available");
    }
    out.visited = 1;
    out.argmin.push_back(Allocation{});
    return out;
  }
  walk(walk, 0, n, 0);
  if (!found) {
    throw Infeasible("capacities cannot absorb demand");
  }
  return out;
}

double Axis::at(std::size_t i) const {
  if (steps <= 1) {
    return lo;
  }
  if (i + 1 == steps) {
    return hi;
  }
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
}

std::size_t GridSpec::point_count() const {
  std::size_t total = tax.steps;
  for (const auto& [id, axis] : subsidies) {
    if (axis.steps == 0 || total > kMaxPoints / axis.steps) {
      return axis.steps == 0 ? 0 : kMaxPoints + 1;
    }
    total *= axis.steps;
  }
  return total;
}

GridResult grid_bilevel(const Scenario& scenario, UpperObjective objective, const GridSpec& grid) {
  std::vector<const Axis*> axes{&grid.tax};
  std::vector<std::string> ids;
  for (const auto& [id, axis] : grid.subsidies) {
    if (!scenario.route(id).subsidizable) {
      throw InvalidPolicy("grid subsidy axis on non-subsidizable route " + id);
    }
    ids.push_back(id);
    axes.push_back(&axis);
  }
  for (const auto* a : axes) {
    if (a->steps == 0 || !(a->lo <= a->hi) || a->lo < 0.0) {
      throw PreconditionViolated("grid axes need 0 <= lo <= hi and at least one step");
    }
  }
  const std::size_t total = grid.point_count();
  if (total > GridSpec::kMaxPoints) {
    throw ResourceBound("grid has more than " + std::to_string(GridSpec::kMaxPoints) + " points");
  }

  GridResult out;
  Fitness best{};
  bool have = false;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t p = 0; p < total; ++p) {
    PolicyVector policy;
    policy.tax_rate = axes[0]->at(idx[0]);
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const Money rate = Money::from_double(axes[j + 1]->at(idx[j + 1]));
      if (rate > Money{}) {
        policy.subsidy_rates[ids[j]] = rate;
      }
    }
    auto eval = evaluate_policy(scenario, policy, objective, grid.budget);
    const Fitness f = rank(eval, policy);
    if (!have || f < best) {
      best = f;
      out.policy = std::move(policy);
      out.evaluation = std::move(eval);
      have = true;
    }
    // Odometer with the last axis fastest.
    for (std::size_t d = axes.size(); d-- > 0;) {
      if (++idx[d] < axes[d]->steps) {
        break;
      }
      idx[d] = 0;
    }
  }
  out.points = total;
  return out;
}

}  // namespace circpolicy
