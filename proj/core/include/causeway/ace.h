#ifndef CAUSEWAY_ACE_H_
#define CAUSEWAY_ACE_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace causeway {

enum class Method { kIpwCombined, kIpwIndividual, kMatchCombined, kMatchIndividual, kCbn };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

// Average causal effect as a risk ratio E[S(1)] / E[S(0)] for one
// (treated, control) comparison, with a 95% interval. The interval is a
// bootstrap percentile interval for the potential-outcome methods and an
// equal-tailed credible interval for the network method; the point need not
// lie inside it.
struct AceEstimate {
  std::string treated;
  std::string control;
  Method method = Method::kIpwCombined;
  double point = 1.0;
  double lower = 1.0;
  double upper = 1.0;
  std::size_t n_used = 0;
  // Expected outcome under treatment / control behind `point`.
  double risk_treated = 0.0;
  double risk_control = 0.0;
  // Matching methods only.
  std::optional<double> discard_fraction;

  bool interval_crosses_one() const { return lower <= 1.0 && upper >= 1.0; }
  nlohmann::json to_json() const;
  static AceEstimate from_json(const nlohmann::json& doc);
};

}  // namespace causeway

#endif  // CAUSEWAY_ACE_H_
