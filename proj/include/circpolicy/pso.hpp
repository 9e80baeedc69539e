#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <random>
#include <span>
#include <type_traits>
#include <vector>

#include "circpolicy/errors.hpp"

namespace circpolicy {

struct Bound {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Bound&) const = default;
};

/// Lexicographic fitness, lower is better: feasibility tier first, then the
/// (penalized) objective, then two tie-breakers.
struct Fitness {
  int tier = 0;
  double value = 0.0;
  double secondary = 0.0;
  double tertiary = 0.0;

  static Fitness of(double v) { return {0, v, 0.0, 0.0}; }
  auto operator<=>(const Fitness&) const = default;
};

struct TracePoint {
  std::size_t iteration = 0;  // counted across restarts
  double score = 0.0;         // best-so-far value, minimization form
  bool feasible = true;
  bool operator==(const TracePoint&) const = default;
};

struct PsoParams {
  std::size_t swarm_size = 10;
  std::size_t iterations = 200;
  double inertia = 0.7298;
  double cognitive = 1.49618;
  double social = 1.49618;
  std::vector<Bound> bounds;  // empty: the caller derives them
  std::uint64_t seed = 2024;
  std::size_t restarts = 5;

  /// Throws PreconditionViolated.
  void check() const {
    if (swarm_size < 2) {
      throw PreconditionViolated("swarm size must be at least 2");
    }
    if (iterations < 1) {
      throw PreconditionViolated("at least one iteration is required");
    }
    if (restarts < 1) {
      throw PreconditionViolated("at least one restart is required");
    }
    for (const auto& b : bounds) {
      if (!(b.lo <= b.hi)) {
        throw PreconditionViolated("search bound with lo > hi");
      }
    }
  }
};

struct PsoResult {
  Eigen::VectorXd best;
  Fitness best_fitness;
  std::vector<TracePoint> trace;
  std::size_t evaluations = 0;
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Global-best particle swarm with per-dimension velocity clamping to the box
/// width and reflection at the bounds.
///
/// `starts` seed the first particles of every restart (truncated to the swarm
/// size); the rest are drawn uniformly. Restart r uses a generator seeded
/// from (seed, r), so results depend only on the inputs.
template <typename Evaluator>
PsoResult pso_run(Evaluator&& evaluate, const PsoParams& params,
                  std::span<const Eigen::VectorXd> starts = {}) {
  params.check();
  const auto dim = static_cast<Eigen::Index>(params.bounds.size());
  Eigen::VectorXd lo(dim), hi(dim);
  for (Eigen::Index d = 0; d < dim; ++d) {
    lo(d) = params.bounds[static_cast<std::size_t>(d)].lo;
    hi(d) = params.bounds[static_cast<std::size_t>(d)].hi;
  }
  const Eigen::VectorXd width = hi - lo;

  auto reflect = [&](Eigen::VectorXd& x, Eigen::VectorXd& v) {
    for (Eigen::Index d = 0; d < dim; ++d) {
      if (width(d) <= 0.0) {
        x(d) = lo(d);
        v(d) = 0.0;
        continue;
      }
      if (x(d) < lo(d)) {
        x(d) = lo(d) + (lo(d) - x(d));
        v(d) = -v(d);
      } else if (x(d) > hi(d)) {
        x(d) = hi(d) - (x(d) - hi(d));
        v(d) = -v(d);
      }
      x(d) = std::clamp(x(d), lo(d), hi(d));
    }
  };

  auto fitness_of = [&](const Eigen::VectorXd& point) -> Fitness {
    using R = std::invoke_result_t<Evaluator&, const Eigen::VectorXd&>;
    if constexpr (std::is_same_v<std::decay_t<R>, Fitness>) {
      return evaluate(point);
    } else {
      return Fitness::of(static_cast<double>(evaluate(point)));
    }
  };

  PsoResult out;
  bool have_best = false;
  std::size_t step = 0;
  const std::size_t n = params.swarm_size;

  for (std::size_t restart = 0; restart < params.restarts; ++restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed),
                      static_cast<std::uint32_t>(params.seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    std::mt19937_64 rng(seq);

    std::vector<Eigen::VectorXd> x(n), v(n), pbest(n);
    std::vector<Fitness> pfit(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i].resize(dim);
      v[i].resize(dim);
      for (Eigen::Index d = 0; d < dim; ++d) {
        x[i](d) = lo(d) + detail::unit_uniform(rng) * width(d);
        v[i](d) = (2.0 * detail::unit_uniform(rng) - 1.0) * 0.1 * width(d);
      }
      if (i < starts.size()) {
        x[i] = starts[i].cwiseMax(lo).cwiseMin(hi);
      }
    }

    std::size_t gbest = 0;
    for (std::size_t i = 0; i < n; ++i) {
      pfit[i] = fitness_of(x[i]);
      ++out.evaluations;
      pbest[i] = x[i];
      if (pfit[i] < pfit[gbest]) {
        gbest = i;
      }
    }

    auto record = [&]() {
      if (!have_best || pfit[gbest] < out.best_fitness) {
        out.best = pbest[gbest];
        out.best_fitness = pfit[gbest];
        have_best = true;
      }
      out.trace.push_back({step++, out.best_fitness.value, out.best_fitness.tier == 0});
    };
    record();

    for (std::size_t it = 0; it < params.iterations; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        for (Eigen::Index d = 0; d < dim; ++d) {
          const double r1 = detail::unit_uniform(rng);
          const double r2 = detail::unit_uniform(rng);
          double vel = params.inertia * v[i](d) +
                       params.cognitive * r1 * (pbest[i](d) - x[i](d)) +
                       params.social * r2 * (pbest[gbest](d) - x[i](d));
          v[i](d) = std::clamp(vel, -width(d), width(d));
        }
        x[i] += v[i];
        reflect(x[i], v[i]);
      }
      // Evaluate in particle order so the result does not depend on scheduling.
      for (std::size_t i = 0; i < n; ++i) {
        const Fitness f = fitness_of(x[i]);
        ++out.evaluations;
        if (f < pfit[i]) {
          pfit[i] = f;
          pbest[i] = x[i];
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (pfit[i] < pfit[gbest]) {
          gbest = i;
        }
      }
      record();
    }
  }
  return out;
}

}  // namespace circpolicy
