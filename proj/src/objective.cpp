#include "circpolicy/objective.hpp"

#include "circpolicy/errors.hpp"

namespace circpolicy {

std::string to_string(UpperObjective objective) {
  switch (objective) {
    case UpperObjective::MinGhg:
      return "min-ghg";
    case UpperObjective::MaxCircularity:
      return "max-circularity";
    case UpperObjective::MostProfitable:
      return "most-profitable";
  }
  return "unknown";
}

UpperObjective parse_objective(std::string_view text) {
  if (text == "min-ghg") {
    return UpperObjective::MinGhg;
  }
  if (text == "max-circularity") {
    return UpperObjective::MaxCircularity;
  }
  if (text == "most-profitable") {
    return UpperObjective::MostProfitable;
  }
  throw PreconditionViolated("unknown objective '" + std::string(text) + "'");
}

double leader_unit_score(const RouteSpec& route, UpperObjective objective) {
  switch (objective) {
    case UpperObjective::MinGhg:
      return route.unit_emissions;
    case UpperObjective::MaxCircularity:
      return -route.unit_circularity;
    case UpperObjective::MostProfitable:
      return 0.0;
  }
  return 0.0;
}

double upper_value(const LowerResult& result, UpperObjective objective) {
  switch (objective) {
    case UpperObjective::MinGhg:
      return result.total_emissions;
    case UpperObjective::MaxCircularity:
      return result.circularity_index;
    case UpperObjective::MostProfitable:
      return result.industry_cost.to_double();
  }
  return 0.0;
}

double minimization_form(double upper, UpperObjective objective) {
  return objective == UpperObjective::MaxCircularity ? -upper : upper;
}

}  // namespace circpolicy
