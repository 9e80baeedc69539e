#include "circpolicy/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace circpolicy {

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot write " + tmp.string());
    }
    out << content;
    out.flush();
    if (!out) {
      throw Error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string format_decimal(double value) {
  if (!std::isfinite(value)) {
    return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s = buf;
  if (s == "-0.000000") {
    s = "0.000000";
  }
  return s;
}

namespace {

std::string sweep_header(const Scenario& scenario) {
  std::string h = "budget,tax_rate,tax_income,subsidy_outlay,upper_value";
  for (const auto& r : scenario.routes()) {
    h += ",units_" + r.route_id;
  }
  h += ",industry_cost,emissions,circularity,status";
  return h;
}

std::string sweep_row(const Scenario& scenario, const SweepRecord& rec) {
  std::string row = rec.budget.to_string(6);
  if (rec.error) {
    row += ",,,,";
    for (std::size_t i = 0; i < scenario.route_count(); ++i) {
      row += ",";
    }
    return row + ",,,,error";
  }
  row += "," + format_decimal(rec.tax_rate);
  row += "," + rec.tax_income.to_string(6);
  row += "," + rec.subsidy_outlay.to_string(6);
  row += "," + format_decimal(rec.upper_value);
  for (const auto& r : scenario.routes()) {
    const auto it = rec.units.find(r.route_id);
    row += "," + std::to_string(it == rec.units.end() ? 0 : it->second);
  }
  row += "," + rec.industry_cost.to_string(6);
  row += "," + format_decimal(rec.emissions);
  row += "," + format_decimal(rec.circularity);
  row += rec.feasible ? ",ok" : ",infeasible";
  return row;
}

}  // namespace

std::string sweep_csv(const Scenario& scenario, const std::vector<SweepRecord>& records) {
  std::string out = sweep_header(scenario) + "\n";
  for (const auto& rec : records) {
    out += sweep_row(scenario, rec) + "\n";
  }
  return out;
}

std::string sensitivity_csv(const Scenario& scenario, const std::string& parameter,
                            const std::vector<SensitivityLevel>& levels) {
  std::string out = parameter + ",pathway," + sweep_header(scenario) + "\n";
  for (const auto& level : levels) {
    for (const auto& rec : level.records) {
      out += format_decimal(level.parameter) + "," + level.pathway + "," +
             sweep_row(scenario, rec) + "\n";
    }
  }
  return out;
}

std::string sensitivity_summary_csv(const std::string& parameter,
                                    const std::vector<SensitivityLevel>& levels) {
  std::string out = parameter +
                    ",pathway,tax_rate_slope,tax_income_slope,subsidy_slope,industry_cost_slope\n";
  auto slope = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    std::string s = buf;
    return s == "-0.000000000" ? std::string("0.000000000") : s;
  };
  for (const auto& l : levels) {
    out += format_decimal(l.parameter) + "," + l.pathway + "," + slope(l.tax_rate_slope) + "," +
           slope(l.tax_income_slope) + "," + slope(l.subsidy_slope) + "," +
           slope(l.industry_cost_slope) + "\n";
  }
  return out;
}

std::string outcome_csv(const Scenario& scenario, UpperObjective objective, Money budget,
                        const BilevelOutcome& o) {
  std::string h = "objective,budget,tax_rate";
  std::string row = to_string(objective) + "," + budget.to_string(6) + "," +
                    format_decimal(o.best_policy.tax_rate);
  for (const auto& r : scenario.routes()) {
    if (r.subsidizable) {
      h += ",subsidy_" + r.route_id;
      row += "," + o.best_policy.subsidy(r.route_id).to_string(6);
    }
  }
  h += ",upper_value,emissions,circularity,industry_cost,tax_income,subsidy_outlay";
  row += "," + format_decimal(o.upper_value) + "," + format_decimal(o.response.total_emissions) +
         "," + format_decimal(o.response.circularity_index) + "," +
         o.response.industry_cost.to_string(6) + "," + o.response.tax_payment.to_string(6) + "," +
         o.response.subsidy_outlay.to_string(6);
  for (const auto& r : scenario.routes()) {
    h += ",units_" + r.route_id;
    row += "," + std::to_string(o.response.allocation.at(r.route_id));
  }
  h += ",feasible,evaluations";
  row += std::string(o.feasible ? ",1," : ",0,") + std::to_string(o.evaluations);
  return h + "\n" + row + "\n";
}

std::string trace_csv(const std::vector<TracePoint>& trace) {
  std::string out = "iteration,best_score,feasible\n";
  for (const auto& t : trace) {
    out += std::to_string(t.iteration) + "," + format_decimal(t.score) + "," +
           (t.feasible ? "1" : "0") + "\n";
  }
  return out;
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series) {
  constexpr double kWidth = 720, kHeight = 440;
  constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
        x0 = std::min(x0, s.x[i]);
        x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, s.y[i]);
        y1 = std::max(y1, s.y[i]);
      }
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  }
  if (x1 - x0 < 1e-12) {
    x0 -= 0.5, x1 += 0.5;
  }
  if (y1 - y0 < 1e-12) {
    const double pad = std::max(std::abs(y0) * 0.05, 0.5);
    y0 -= pad, y1 += pad;
  } else {
    const double pad = (y1 - y0) * 0.05;
    y0 -= pad, y1 += pad;
  }
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << escape_xml(title) << "</text>\n";
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    os << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + ph + 18)
       << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
    os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(yv) + 4)
       << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << num(kLeft + pw)
       << "\" y2=\"" << num(py(yv)) << "\" stroke=\"#ddd\"/>\n";
  }
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 16)
     << "\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << num(kTop + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % 8];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        continue;
      }
      os << (first ? "" : " ") << num(px(s.x[i])) << "," << num(py(s.y[i]));
      first = false;
    }
    os << "\"/>\n";
    const double ly = kTop + 14 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << num(kLeft + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
       << num(kLeft + pw + 32) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(kLeft + pw + 38) << "\" y=\"" << num(ly + 4) << "\">"
       << escape_xml(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace circpolicy
