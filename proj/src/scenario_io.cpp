#include "circpolicy/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "circpolicy/errors.hpp"
#include "circpolicy/report.hpp"

namespace circpolicy {

namespace {

using nlohmann::json;

/// Pulls typed fields out of JSON objects, collecting problems instead of
/// stopping at the first one.
class Reader {
public:
  std::vector<std::string> issues;

  bool object(const json& j, const std::string& path, std::initializer_list<const char*> known) {
    if (!j.is_object()) {
      issue(path, "expected an object");
      return false;
    }
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, value] : j.items()) {
      if (!allowed.contains(key)) {
        issue(join(path, key), "unknown field");
      }
    }
    return true;
  }

  template <typename T>
  void field(const json& obj, const char* key, const std::string& path, T& out,
             bool required = true) {
    const auto it = obj.find(key);
    const std::string at = join(path, key);
    if (it == obj.end()) {
      if (required) {
        issue(at, "missing required field");
      }
      return;
    }
    read(*it, at, out);
  }

  void issue(const std::string& path, const std::string& what) {
    issues.push_back((path.empty() ? std::string("<root>") : path) + ": " + what);
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  void read(const json& j, const std::string& at, std::string& out) {
    if (!j.is_string()) {
      return issue(at, "expected a string");
    }
    out = j.get<std::string>();
  }
  void read(const json& j, const std::string& at, double& out) {
    if (!j.is_number()) {
      return issue(at, "expected a number");
    }
    out = j.get<double>();
  }
  void read(const json& j, const std::string& at, std::int64_t& out) {
    if (!j.is_number_integer()) {
      return issue(at, "expected an integer");
    }
    out = j.get<std::int64_t>();
  }
  void read(const json& j, const std::string& at, bool& out) {
    if (!j.is_boolean()) {
      return issue(at, "expected true or false");
    }
    out = j.get<bool>();
  }
  void read(const json& j, const std::string& at, Money& out) {
    try {
      if (j.is_string()) {
        out = Money::parse(j.get<std::string>());
        return;
      }
      if (j.is_number()) {
        out = Money::from_double(j.get<double>());
        return;
      }
    } catch (const std::exception& e) {
      return issue(at, e.what());
    }
    issue(at, "expected a decimal string or a number");
  }
  template <typename T>
  void read(const json& j, const std::string& at, std::vector<T>& out) {
    if (!j.is_array()) {
      return issue(at, "expected an array");
    }
    out.clear();
    for (std::size_t i = 0; i < j.size(); ++i) {
      T v{};
      read(j[i], at + "[" + std::to_string(i) + "]", v);
      out.push_back(std::move(v));
    }
  }
  template <typename T>
  void read(const json& j, const std::string& at, std::map<std::string, T>& out) {
    if (!j.is_object()) {
      return issue(at, "expected an object");
    }
    out.clear();
    for (const auto& [key, value] : j.items()) {
      T v{};
      read(value, join(at, key), v);
      out.emplace(key, std::move(v));
    }
  }
};

RouteSpec read_route(Reader& r, const json& j, const std::string& path) {
  RouteSpec route;
  if (!r.object(j, path,
                {"route_id", "product_id", "technology_id", "recovered_outputs", "unit_cost",
                 "unit_emissions", "unit_circularity", "subsidizable", "dominated",
                 "stage_breakdown"})) {
    return route;
  }
  r.field(j, "route_id", path, route.route_id);
  r.field(j, "product_id", path, route.product_id);
  r.field(j, "technology_id", path, route.technology_id);
  r.field(j, "recovered_outputs", path, route.recovered_outputs, false);
  r.field(j, "unit_cost", path, route.unit_cost);
  r.field(j, "unit_emissions", path, route.unit_emissions);
  r.field(j, "unit_circularity", path, route.unit_circularity);
  r.field(j, "subsidizable", path, route.subsidizable, false);
  r.field(j, "dominated", path, route.dominated, false);
  r.field(j, "stage_breakdown", path, route.stage_breakdown, false);
  return route;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  // nlohmann reports the 1-based byte position of the offending character.
  const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    throw ParseError(e.what(), line, column);
  }

  Reader r;
  ScenarioSpec spec;
  if (r.object(root, "",
               {"name", "demand", "routes", "modifiers", "technology_fixed_costs",
                "capacity_limits", "policy_bounds"})) {
    r.field(root, "name", "", spec.name, false);
    r.field(root, "demand", "", spec.demand);
    if (const auto it = root.find("routes"); it == root.end()) {
      r.issue("routes", "missing required field");
    } else if (!it->is_array()) {
      r.issue("routes", "expected an array");
    } else {
      for (std::size_t i = 0; i < it->size(); ++i) {
        spec.routes.push_back(read_route(r, (*it)[i], "routes[" + std::to_string(i) + "]"));
      }
    }
    if (const auto it = root.find("modifiers"); it != root.end()) {
      auto& m = spec.modifiers;
      if (r.object(*it, "modifiers",
                   {"glass_wash_distance", "glass_loss_fraction", "distance_cost_coeff",
                    "distance_emission_coeff", "loss_cost_coeff", "loss_emission_coeff",
                    "affected_route_ids"})) {
        r.field(*it, "glass_wash_distance", "modifiers", m.glass_wash_distance, false);
        r.field(*it, "glass_loss_fraction", "modifiers", m.glass_loss_fraction, false);
        r.field(*it, "distance_cost_coeff", "modifiers", m.distance_cost_coeff, false);
        r.field(*it, "distance_emission_coeff", "modifiers", m.distance_emission_coeff, false);
        r.field(*it, "loss_cost_coeff", "modifiers", m.loss_cost_coeff, false);
        r.field(*it, "loss_emission_coeff", "modifiers", m.loss_emission_coeff, false);
        r.field(*it, "affected_route_ids", "modifiers", m.affected_route_ids, false);
      }
    }
    r.field(root, "technology_fixed_costs", "", spec.technology_fixed_costs, false);
    r.field(root, "capacity_limits", "", spec.capacity_limits, false);
    if (const auto it = root.find("policy_bounds"); it != root.end()) {
      if (r.object(*it, "policy_bounds", {"max_tax", "max_subsidy"})) {
        r.field(*it, "max_tax", "policy_bounds", spec.policy_bounds.max_tax, false);
        r.field(*it, "max_subsidy", "policy_bounds", spec.policy_bounds.max_subsidy, false);
      }
    }
  }
  if (root.is_object() && root.contains("demand") && root["demand"].is_number_integer() &&
      spec.demand < 1) {
    r.issue("demand", "must be at least 1");
  }

  std::vector<std::string> issues = std::move(r.issues);
  try {
    Scenario scenario(std::move(spec));
    if (issues.empty()) {
      return scenario;
    }
  } catch (const ValidationError& e) {
    for (const auto& i : e.issues()) {
      if (std::find(issues.begin(), issues.end(), i) == issues.end()) {
        issues.push_back(i);
      }
    }
  }
  throw ValidationError(std::move(issues));
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open scenario file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_to_json(const Scenario& scenario) {
  const auto& s = scenario.spec();
  nlohmann::ordered_json routes = nlohmann::ordered_json::array();
  for (const auto& r : s.routes) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    j["route_id"] = r.route_id;
    j["product_id"] = r.product_id;
    j["technology_id"] = r.technology_id;
    j["recovered_outputs"] = r.recovered_outputs;
    j["unit_cost"] = r.unit_cost.to_string(9);
    j["unit_emissions"] = r.unit_emissions;
    j["unit_circularity"] = r.unit_circularity;
    j["subsidizable"] = r.subsidizable;
    j["dominated"] = r.dominated;
    if (!r.stage_breakdown.empty()) {
      j["stage_breakdown"] = r.stage_breakdown;
    }
    routes.push_back(std::move(j));
  }
  nlohmann::ordered_json fixed = nlohmann::ordered_json::object();
  for (const auto& [tech, cost] : s.technology_fixed_costs) {
    fixed[tech] = cost.to_string(9);
  }
  const auto& m = s.modifiers;
  nlohmann::ordered_json root = nlohmann::ordered_json::object();
  root["name"] = s.name;
  root["demand"] = s.demand;
  root["routes"] = std::move(routes);
  root["modifiers"] = {{"glass_wash_distance", m.glass_wash_distance},
                       {"glass_loss_fraction", m.glass_loss_fraction},
                       {"distance_cost_coeff", m.distance_cost_coeff},
                       {"distance_emission_coeff", m.distance_emission_coeff},
                       {"loss_cost_coeff", m.loss_cost_coeff},
                       {"loss_emission_coeff", m.loss_emission_coeff},
                       {"affected_route_ids", m.affected_route_ids}};
  root["technology_fixed_costs"] = std::move(fixed);
  root["capacity_limits"] = s.capacity_limits;
  root["policy_bounds"] = {{"max_tax", s.policy_bounds.max_tax},
                           {"max_subsidy", s.policy_bounds.max_subsidy}};
  return root.dump(2) + "\n";
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  write_file_atomic(path, scenario_to_json(scenario));
}

}  // namespace circpolicy
