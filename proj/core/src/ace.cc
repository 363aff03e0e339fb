#include "causeway/ace.h"

#include "causeway/error.h"

namespace causeway {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kIpwCombined:
      return "ipw_combined";
    case Method::kIpwIndividual:
      return "ipw_individual";
    case Method::kMatchCombined:
      return "match_combined";
    case Method::kMatchIndividual:
      return "match_individual";
    case Method::kCbn:
      return "cbn";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::kIpwCombined, Method::kIpwIndividual, Method::kMatchCombined,
                   Method::kMatchIndividual, Method::kCbn}) {
    if (to_string(m) == text) return m;
  }
  throw ParseError("unknown method '" + std::string(text) + "'");
}

nlohmann::json AceEstimate::to_json() const {
  nlohmann::json out{{"treated", treated},
                     {"control", control},
                     {"method", std::string(to_string(method))},
                     {"point", point},
                     {"interval", {lower, upper}},
                     {"n_used", n_used},
                     {"risk_treated", risk_treated},
                     {"risk_control", risk_control}};
  if (discard_fraction) out["discard_fraction"] = *discard_fraction;
  return out;
}

AceEstimate AceEstimate::from_json(const nlohmann::json& doc) {
  try {
    AceEstimate e;
    e.treated = doc.at("treated").get<std::string>();
    e.control = doc.at("control").get<std::string>();
    e.method = parse_method(doc.at("method").get<std::string>());
    e.point = doc.at("point").get<double>();
    e.lower = doc.at("interval").at(0).get<double>();
    e.upper = doc.at("interval").at(1).get<double>();
    e.n_used = doc.value("n_used", std::size_t{0});
    e.risk_treated = doc.value("risk_treated", 0.0);
    e.risk_control = doc.value("risk_control", 0.0);
    if (doc.contains("discard_fraction")) e.discard_fraction = doc.at("discard_fraction").get<double>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("estimate json: ") + ex.what());
  }
}

}  // namespace causeway
