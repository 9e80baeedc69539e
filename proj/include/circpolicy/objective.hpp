#pragma once

#include <string>
#include <string_view>

#include "circpolicy/model.hpp"

namespace circpolicy {

/// What the leader optimizes. MostProfitable is a diagnostic mode: no policy,
/// the follower's own optimum is reported.
enum class UpperObjective { MinGhg, MaxCircularity, MostProfitable };

std::string to_string(UpperObjective objective);
/// Accepts "min-ghg", "max-circularity", "most-profitable".
UpperObjective parse_objective(std::string_view text);

/// Leader's per-unit preference in minimization form (lower is better).
double leader_unit_score(const RouteSpec& route, UpperObjective objective);

/// Upper objective of a response in natural units: kg-CO2e, circularity
/// index, or industry cost.
double upper_value(const LowerResult& result, UpperObjective objective);

/// Same value in minimization form.
double minimization_form(double upper, UpperObjective objective);

}  // namespace circpolicy
