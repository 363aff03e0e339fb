#include "causeway/render.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "causeway/error.h"

namespace causeway {
namespace {

constexpr double kLeft = 170;
constexpr double kPlotWidth = 420;
constexpr double kTop = 40;
constexpr double kRowHeight = 26;

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(double width, double height) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_number(width) +
         "\" height=\"" + svg_number(height) + "\" viewBox=\"0 0 " + svg_number(width) + " " +
         svg_number(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
}

std::string method_colour(Method m) {
  switch (m) {
    case Method::kIpwCombined: return "#1f77b4";
    case Method::kIpwIndividual: return "#17becf";
    case Method::kMatchCombined: return "#ff7f0e";
    case Method::kMatchIndividual: return "#bcbd22";
    case Method::kCbn: return "#d62728";
  }
  return "#000000";
}

}  // namespace

std::string svg_number(double value) {
  if (!std::isfinite(value)) throw Error("svg: non-finite coordinate");
  if (value == 0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string render_balance_svg(const std::vector<BalanceRow>& table, double threshold,
                               std::string_view title) {
  if (table.empty()) throw Error("render_balance_svg: empty balance table");
  if (!(threshold >= 0 && threshold <= 1)) throw Error("render_balance_svg: threshold outside [0, 1]");
  const double height = kTop + kRowHeight * table.size() + 50;
  const double width = kLeft + kPlotWidth + 30;
  const double bottom = kTop + kRowHeight * table.size();
  auto x_of = [](double p) { return kLeft + kPlotWidth * std::clamp(p, 0.0, 1.0); };

  std::ostringstream s;
  s << header(width, height);
  if (!title.empty()) {
    s << "<text class=\"title\" x=\"" << svg_number(kLeft) << "\" y=\"20\">" << escape(title)
      << "</text>\n";
  }
  s << "<line class=\"axis\" x1=\"" << svg_number(kLeft) << "\" y1=\"" << svg_number(bottom)
    << "\" x2=\"" << svg_number(kLeft + kPlotWidth) << "\" y2=\"" << svg_number(bottom)
    << "\" stroke=\"#000000\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double p = t / 4.0;
    s << "<text class=\"tick\" x=\"" << svg_number(x_of(p)) << "\" y=\""
      << svg_number(bottom + 16) << "\" text-anchor=\"middle\">" << svg_number(p) << "</text>\n";
  }
  s << "<text class=\"axis-label\" x=\"" << svg_number(kLeft + kPlotWidth / 2) << "\" y=\""
    << svg_number(bottom + 36) << "\" text-anchor=\"middle\">KS p-value</text>\n";
  s << "<line class=\"threshold\" x1=\"" << svg_number(x_of(threshold)) << "\" y1=\""
    << svg_number(kTop - 10) << "\" x2=\"" << svg_number(x_of(threshold)) << "\" y2=\""
    << svg_number(bottom) << "\" stroke=\"#555555\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table[i];
    const double y = kTop + kRowHeight * (i + 0.5);
    s << "<text class=\"label\" x=\"" << svg_number(kLeft - 10) << "\" y=\"" << svg_number(y + 4)
      << "\" text-anchor=\"end\">" << escape(row.covariate) << "</text>\n";
    s << "<circle class=\"marker before\" cx=\"" << svg_number(x_of(row.p_before)) << "\" cy=\""
      << svg_number(y) << "\" r=\"5\" fill=\"none\" stroke=\"#000000\"/>\n";
    s << "<circle class=\"marker after\" cx=\"" << svg_number(x_of(row.p_after)) << "\" cy=\""
      << svg_number(y) << "\" r=\"4\" fill=\"#000000\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string render_ci_overlap_svg(std::span<const AceEstimate> estimates) {
  if (estimates.empty()) throw Error("render_ci_overlap_svg: no estimates");
  // Comparisons in first-seen order, methods within each.
  std::vector<std::pair<std::string, std::string>> comparisons;
  for (const auto& e : estimates) {
    std::pair<std::string, std::string> key{e.treated, e.control};
    if (std::find(comparisons.begin(), comparisons.end(), key) == comparisons.end()) {
      comparisons.push_back(key);
    }
  }
  double lo = 1, hi = 1;
  for (const auto& e : estimates) {
    for (double v : {e.lower, e.upper, e.point}) {
      if (v > 0 && std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  const double log_lo = std::log(lo) - 0.1;
  const double log_hi = std::log(hi) + 0.1;
  auto x_of = [&](double v) {
    const double lv = std::log(std::max(v, lo));
    return kLeft + kPlotWidth * (lv - log_lo) / (log_hi - log_lo);
  };
  const double rows = static_cast<double>(estimates.size() + comparisons.size());
  const double bottom = kTop + kRowHeight * rows;
  const double width = kLeft + kPlotWidth + 30;
  const double height = bottom + 50;

  std::ostringstream s;
  s << header(width, height);
  s << "<line class=\"axis\" x1=\"" << svg_number(kLeft) << "\" y1=\"" << svg_number(bottom)
    << "\" x2=\"" << svg_number(kLeft + kPlotWidth) << "\" y2=\"" << svg_number(bottom)
    << "\" stroke=\"#000000\"/>\n";
  for (double t : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    if (std::log(t) < log_lo || std::log(t) > log_hi) continue;
    s << "<text class=\"tick\" x=\"" << svg_number(x_of(t)) << "\" y=\"" << svg_number(bottom + 16)
      << "\" text-anchor=\"middle\">" << svg_number(t) << "</text>\n";
  }
  s << "<text class=\"axis-label\" x=\"" << svg_number(kLeft + kPlotWidth / 2) << "\" y=\""
    << svg_number(bottom + 36) << "\" text-anchor=\"middle\">risk ratio (log scale)</text>\n";
  s << "<line class=\"reference\" x1=\"" << svg_number(x_of(1.0)) << "\" y1=\""
    << svg_number(kTop - 10) << "\" x2=\"" << svg_number(x_of(1.0)) << "\" y2=\""
    << svg_number(bottom) << "\" stroke=\"#888888\"/>\n";

  double row = 0;
  for (const auto& [treated, control] : comparisons) {
    const double gy = kTop + kRowHeight * (row + 0.5);
    s << "<text class=\"comparison\" x=\"10\" y=\"" << svg_number(gy + 4) << "\">"
      << escape(treated) << " vs " << escape(control) << "</text>\n";
    ++row;
    for (const auto& e : estimates) {
      if (e.treated != treated || e.control != control) continue;
      const double y = kTop + kRowHeight * (row + 0.5);
      const bool crosses = e.interval_crosses_one();
      const std::string colour = method_colour(e.method);
      s << "<text class=\"method\" x=\"" << svg_number(kLeft - 10) << "\" y=\""
        << svg_number(y + 4) << "\" text-anchor=\"end\">" << to_string(e.method) << "</text>\n";
      s << "<line class=\"interval" << (crosses ? " crosses-one" : "") << "\" data-method=\""
        << to_string(e.method) << "\" x1=\"" << svg_number(x_of(e.lower)) << "\" y1=\""
        << svg_number(y) << "\" x2=\"" << svg_number(x_of(e.upper)) << "\" y2=\""
        << svg_number(y) << "\" stroke=\"" << colour << "\" stroke-width=\"2\""
        << (crosses ? " stroke-dasharray=\"5 3\"" : "") << "/>\n";
      s << "<circle class=\"point\" data-method=\"" << to_string(e.method) << "\" cx=\""
        << svg_number(x_of(e.point)) << "\" cy=\"" << svg_number(y) << "\" r=\"4\" fill=\""
        << colour << "\"/>\n";
      ++row;
    }
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace causeway
