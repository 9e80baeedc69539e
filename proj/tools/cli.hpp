#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "circpolicy/analysis.hpp"

namespace circpolicy::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kSolver = 2, kMismatch = 3 };

struct RunConfig {
  std::string command;  // run, sweep, sensitivity, verify, calibrate
  std::filesystem::path scenario;
  UpperObjective objective = UpperObjective::MinGhg;
  Money budget;
  std::vector<Money> budgets;
  SweepMode mode = SweepMode::Combined;
  std::string parameter = "distance";  // sensitivity: distance or loss
  std::vector<double> values;
  PsoParams pso;
  std::filesystem::path output_dir;
  std::string name;  // output file stem
  bool emit_svg = false;
  std::int64_t verify_demand = 10;
  std::size_t verify_cases = 50;
  std::filesystem::path calibrate_output;  // empty: <output_dir>/coffee_case.scenario
};

/// "lo:hi:step" (inclusive) or a comma-separated list.
std::vector<double> parse_grid(const std::string& text);

/// Executes a parsed configuration. Returns the exit code; throws Error on failure.
int run_command(const RunConfig& config, std::ostream& out);

/// Full command line: parses, runs, and maps failures to exit codes with a
/// JSON error record on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace circpolicy::cli
