#include "circpolicy/lower_solver.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace circpolicy {

Money net_unit_cost(const RouteSpec& route, const PolicyVector& policy) {
  return route.unit_cost + unit_tax(route, policy.tax_rate) - policy.subsidy(route.route_id);
}

GreedySolution solve_lower_greedy(const Scenario& scenario, const PolicyVector& policy) {
  if (!scenario.is_pure_linear()) {
    throw PreconditionViolated("greedy follower solver requires a pure per-unit-linear scenario");
  }
  if (scenario.route_count() == 0) {
    throw Infeasible("no routes available");
  }
  validate_policy(scenario, policy);

  std::vector<Money> net;
  net.reserve(scenario.route_count());
  for (const auto& r : scenario.routes()) {
    net.push_back(net_unit_cost(r, policy));
  }
  const Money best = *std::min_element(net.begin(), net.end());

  GreedySolution out;
  out.tie.min_net_cost = best;
  const std::string* canonical = nullptr;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& id = scenario.routes()[i].route_id;
    if (net[i] - best <= kTieTolerance) {
      out.tie.route_ids.push_back(id);
    }
    if (net[i] == best && (canonical == nullptr || id < *canonical)) {
      canonical = &id;
    }
  }
  std::sort(out.tie.route_ids.begin(), out.tie.route_ids.end());
  out.allocation = Allocation(scenario, scenario.demand() > 0
                                            ? std::map<std::string, std::int64_t>{{*canonical, scenario.demand()}}
                                            : std::map<std::string, std::int64_t>{});
  out.objective = best * scenario.demand();
  return out;
}

namespace {

struct RelaxationLayout {
  std::size_t routes = 0;
  std::vector<std::string> technologies;       // one binary each
  std::vector<std::ptrdiff_t> route_binary;    // per route, -1 if none
};

RelaxationLayout layout_of(const Scenario& scenario) {
  RelaxationLayout lay;
  lay.routes = scenario.route_count();
  lay.route_binary.assign(lay.routes, -1);
  for (std::size_t i = 0; i < lay.routes; ++i) {
    const auto& tech = scenario.routes()[i].technology_id;
    if (scenario.fixed_cost(tech) <= Money{}) {
      continue;
    }
    auto it = std::find(lay.technologies.begin(), lay.technologies.end(), tech);
    if (it == lay.technologies.end()) {
      lay.technologies.push_back(tech);
      it = std::prev(lay.technologies.end());
    }
    lay.route_binary[i] =
        static_cast<std::ptrdiff_t>(lay.routes) + (it - lay.technologies.begin());
  }
  return lay;
}

}  // namespace

LinearProgram<double> lower_relaxation(const Scenario& scenario, const PolicyVector& policy) {
  validate_policy(scenario, policy);
  const auto lay = layout_of(scenario);
  const auto n = static_cast<Eigen::Index>(lay.routes + lay.technologies.size());
  auto lp = LinearProgram<double>::with_variables(n);

  Eigen::VectorXd demand_row = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < lay.routes; ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    lp.objective(idx) = net_unit_cost(scenario.routes()[i], policy).to_double();
    lp.upper(idx) = static_cast<double>(scenario.capacity(i));
    demand_row(idx) = 1.0;
  }
  for (std::size_t k = 0; k < lay.technologies.size(); ++k) {
    const auto idx = static_cast<Eigen::Index>(lay.routes + k);
    lp.objective(idx) = scenario.fixed_cost(lay.technologies[k]).to_double();
    lp.upper(idx) = 1.0;
  }
  lp.add_constraint(demand_row, Relation::Equal, static_cast<double>(scenario.demand()));
  for (std::size_t i = 0; i < lay.routes; ++i) {
    if (lay.route_binary[i] < 0) {
      continue;
    }
    Eigen::VectorXd link = Eigen::VectorXd::Zero(n);
    link(static_cast<Eigen::Index>(i)) = 1.0;
    link(lay.route_binary[i]) = -static_cast<double>(scenario.capacity(i));
    lp.add_constraint(link, Relation::LessEqual, 0.0);
  }
  return lp;
}

LowerResult solve_lower_milp(const Scenario& scenario, const PolicyVector& policy,
                             const MilpOptions& options) {
  const auto root_lp = lower_relaxation(scenario, policy);
  const auto lay = layout_of(scenario);
  constexpr double kIntegrality = 1e-6;

  struct Node {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    LpSolution<double> lp;
    std::size_t seq;
  };
  auto worse = [](const Node& a, const Node& b) {
    if (a.lp.objective != b.lp.objective) {
      return a.lp.objective > b.lp.objective;
    }
    return a.seq > b.seq;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);

  auto solve_node = [&](const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    auto lp = root_lp;
    lp.lower = lo;
    lp.upper = hi;
    return simplex_solve(lp, options.lp);
  };

  std::size_t seq = 0;
  auto root = solve_node(root_lp.lower, root_lp.upper);
  if (root.status == LpStatus::Infeasible) {
    throw Infeasible("follower problem has no feasible allocation");
  }
  if (root.status == LpStatus::Unbounded) {
    throw Unbounded("follower problem is unbounded");
  }
  open.push(Node{root_lp.lower, root_lp.upper, std::move(root), seq++});

  std::optional<LowerResult> incumbent;
  double incumbent_value = std::numeric_limits<double>::infinity();
  std::size_t explored = 0;

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (node.lp.objective >= incumbent_value - options.absolute_gap) {
      continue;
    }
    if (++explored > options.max_nodes) {
      throw ResourceLimit("branch-and-bound node budget exhausted", incumbent);
    }

    Eigen::Index branch = -1;
    double most = kIntegrality;
    for (Eigen::Index j = 0; j < node.lp.x.size(); ++j) {
      const double frac = node.lp.x(j) - std::floor(node.lp.x(j));
      const double dist = std::min(frac, 1.0 - frac);
      if (dist > most) {
        most = dist;
        branch = j;
      }
    }

    if (branch < 0) {
      std::map<std::string, std::int64_t> units;
      for (std::size_t i = 0; i < lay.routes; ++i) {
        units[scenario.routes()[i].route_id] =
            std::llround(node.lp.x(static_cast<Eigen::Index>(i)));
      }
      auto result = make_lower_result(scenario, policy, Allocation(scenario, std::move(units)));
      const double value = result.industry_cost.to_double();
      if (value < incumbent_value) {
        incumbent_value = value;
        incumbent = std::move(result);
      }
      continue;
    }

    const double v = node.lp.x(branch);
    Eigen::VectorXd down_hi = node.upper;
    down_hi(branch) = std::floor(v);
    Eigen::VectorXd up_lo = node.lower;
    up_lo(branch) = std::ceil(v);
    for (auto [lo, hi] : {std::pair{node.lower, down_hi}, std::pair{up_lo, node.upper}}) {
      if (lo(branch) > hi(branch)) {
        continue;
      }
      auto child = solve_node(lo, hi);
      if (child.status == LpStatus::Optimal &&
          child.objective < incumbent_value - options.absolute_gap) {
        open.push(Node{lo, hi, std::move(child), seq++});
      }
    }
  }

  if (!incumbent) {
    throw Infeasible("follower problem has no integer-feasible allocation");
  }
  return *incumbent;
}

Selection optimistic_select(const Scenario& scenario, const PolicyVector& policy,
                            const TieSet& tie, UpperObjective objective, Money budget) {
  const std::int64_t n = scenario.demand();
  if (tie.route_ids.empty() || n == 0) {
    return {Allocation(scenario, {}), budget >= Money{}};
  }

  struct Candidate {
    const std::string* id;
    double score;        // leader, minimization form
    std::int64_t draw;   // subsidy minus tax per unit, ticks
  };
  std::vector<Candidate> cands;
  cands.reserve(tie.route_ids.size());
  for (const auto& id : tie.route_ids) {
    const auto& r = scenario.route(id);
    const Money draw = policy.subsidy(id) - unit_tax(r, policy.tax_rate);
    cands.push_back({&id, leader_unit_score(r, objective), draw.ticks()});
  }

  const __int128 b = budget.ticks();
  struct Choice {
    const Candidate* first = nullptr;   // gets `k` units
    const Candidate* second = nullptr;  // gets the rest
    std::int64_t k = 0;
    double value = 0.0;
    __int128 draw = 0;
  };
  auto better = [](const Choice& a, const Choice& c) {
    if (a.value != c.value) {
      return a.value < c.value;
    }
    if (a.draw != c.draw) {
      return a.draw < c.draw;
    }
    return *a.first->id < *c.first->id;
  };

  std::optional<Choice> best;
  auto offer = [&](const Choice& c) {
    if (!best || better(c, *best)) {
      best = c;
    }
  };

  for (const auto& c : cands) {
    const __int128 draw = static_cast<__int128>(c.draw) * n;
    if (draw <= b) {
      offer({&c, nullptr, n, c.score * static_cast<double>(n), draw});
    }
  }
  for (const auto& hi : cands) {
    for (const auto& lo : cands) {
      // `hi` is better for the leader but draws more funds than `lo`.
      if (!(hi.score < lo.score) || !(hi.draw > lo.draw)) {
        continue;
      }
      const __int128 slack = b - static_cast<__int128>(lo.draw) * n;
      if (slack < 0) {
        continue;
      }
      const __int128 k128 = slack / (static_cast<__int128>(hi.draw) - lo.draw);
      if (k128 <= 0 || k128 >= n) {
        continue;
      }
      const auto k = static_cast<std::int64_t>(k128);
      const double value =
          hi.score * static_cast<double>(k) + lo.score * static_cast<double>(n - k);
      const __int128 draw = static_cast<__int128>(hi.draw) * k + static_cast<__int128>(lo.draw) * (n - k);
      offer({&hi, &lo, k, value, draw});
    }
  }

  if (best) {
    std::map<std::string, std::int64_t> units{{*best->first->id, best->k}};
    if (best->second != nullptr) {
      units[*best->second->id] = n - best->k;
    }
    return {Allocation(scenario, std::move(units)), true};
  }

  const Candidate* leader = &cands.front();
  for (const auto& c : cands) {
    if (c.score < leader->score ||
        (c.score == leader->score && (c.draw < leader->draw ||
                                      (c.draw == leader->draw && *c.id < *leader->id)))) {
      leader = &c;
    }
  }
  return {Allocation(scenario, {{*leader->id, n}}), false};
}

}  // namespace circpolicy
