#ifndef CAUSEWAY_RENDER_H_
#define CAUSEWAY_RENDER_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causeway/ace.h"
#include "causeway/potential_outcomes.h"

namespace causeway {

// Shortest "%.6g" text of a value; all figure coordinates go through it.
std::string svg_number(double value);

// One row per covariate with a hollow marker at the unweighted p-value and a
// filled marker at the weighted one, on a [0, 1] axis with a dashed line at
// `threshold`.
std::string render_balance_svg(const std::vector<BalanceRow>& table, double threshold = 0.05,
                               std::string_view title = "");

// Interval and point per (comparison, method) on a log risk-ratio axis with a
// reference line at 1. Intervals containing 1 carry the "crosses-one" class
// and a dashed stroke.
std::string render_ci_overlap_svg(std::span<const AceEstimate> estimates);

}  // namespace causeway

#endif  // CAUSEWAY_RENDER_H_
