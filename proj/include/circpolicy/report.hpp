#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "circpolicy/analysis.hpp"
#include "circpolicy/bilevel.hpp"

namespace circpolicy {

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Fixed six-decimal rendering; never prints "-0.000000".
std::string format_decimal(double value);

/// One row per record: budget, tax_rate, tax_income, subsidy_outlay,
/// upper_value, units_<route> per route in catalog order, industry_cost,
/// emissions, circularity, status (ok, infeasible or error).
std::string sweep_csv(const Scenario& scenario, const std::vector<SweepRecord>& records);

/// Sweep rows prefixed by the parameter value and the level's pathway.
std::string sensitivity_csv(const Scenario& scenario, const std::string& parameter,
                            const std::vector<SensitivityLevel>& levels);

/// Fitted slopes per level.
std::string sensitivity_summary_csv(const std::string& parameter,
                                    const std::vector<SensitivityLevel>& levels);

std::string outcome_csv(const Scenario& scenario, UpperObjective objective, Money budget,
                        const BilevelOutcome& outcome);

std::string trace_csv(const std::vector<TracePoint>& trace);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Simple polyline chart with axis labels and a legend.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series);

}  // namespace circpolicy
