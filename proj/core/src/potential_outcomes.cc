#include "causeway/potential_outcomes.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "causeway/error.h"
#include "causeway/parallel.h"
#include "causeway/rng.h"

namespace causeway {
namespace {

constexpr char kTreatmentFeature[] = "treatment_indicator";

// Groups the rows of a feature matrix by identical feature vectors so models
// are evaluated once per distinct covariate pattern.
struct PatternIndex {
  std::vector<std::vector<double>> rows;  // one feature vector per pattern
  std::vector<std::size_t> pattern_of;    // per input row

  explicit PatternIndex(const FeatureMatrix& x) {
    const std::size_t n = x.num_rows();
    const std::size_t nf = x.num_features();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto cmp = [&](std::size_t a, std::size_t b) {
      for (std::size_t f = 0; f < nf; ++f) {
        const double va = x.value(a, f), vb = x.value(b, f);
        if (va != vb) return va < vb;
      }
      return false;
    };
    std::stable_sort(order.begin(), order.end(), cmp);
    pattern_of.assign(n, 0);
    std::vector<double> buf(nf);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == 0 || cmp(order[i - 1], order[i])) {
        x.row(order[i], buf);
        rows.push_back(buf);
      }
      pattern_of[order[i]] = rows.size() - 1;
    }
  }
  std::size_t size() const { return rows.size(); }
};

void require_arms(const TreatmentPair& pair, std::size_t min_rows) {
  if (pair.indicator.size() != pair.data.num_rows()) {
    throw Error("treatment pair: indicator length differs from data");
  }
  const std::size_t nt = pair.num_treated();
  const std::size_t nc = pair.num_control();
  if (nt < min_rows || nc < min_rows) {
    throw Error("treatment pair " + pair.treated_level + " vs " + pair.control_level +
                " needs >= " + std::to_string(min_rows) + " rows per arm (has " +
                std::to_string(nt) + " / " + std::to_string(nc) + ")");
  }
}

// Pooled sample sorted by value, for repeated KS evaluations under
// relabelling.
struct PooledSample {
  std::vector<double> values;
  std::vector<double> weights;
  std::vector<int> group;  // 1 treated, 0 control

  PooledSample(std::span<const double> xt, std::span<const double> wt, std::span<const double> xc,
               std::span<const double> wc) {
    std::vector<std::size_t> order(xt.size() + xc.size());
    std::iota(order.begin(), order.end(), 0);
    auto val = [&](std::size_t i) { return i < xt.size() ? xt[i] : xc[i - xt.size()]; };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return val(a) < val(b); });
    for (std::size_t i : order) {
      values.push_back(val(i));
      weights.push_back(i < xt.size() ? wt[i] : wc[i - xt.size()]);
      group.push_back(i < xt.size() ? 1 : 0);
    }
  }

  double statistic(std::span<const int> labels) const {
    double total_t = 0, total_c = 0;
    for (std::size_t i = 0; i < values.size(); ++i) (labels[i] ? total_t : total_c) += weights[i];
    if (!(total_t > 0) || !(total_c > 0)) throw Error("weighted KS: a group has zero total weight");
    double ft = 0, fc = 0, best = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      (labels[i] ? ft : fc) += weights[i];
      if (i + 1 == values.size() || values[i + 1] != values[i]) {
        best = std::max(best, std::abs(ft / total_t - fc / total_c));
      }
    }
    return std::min(best, 1.0);
  }
};

void check_ks_inputs(std::span<const double> xt, std::span<const double> wt,
                     std::span<const double> xc, std::span<const double> wc) {
  if (xt.empty() || xc.empty()) throw Error("weighted KS: empty group");
  if (xt.size() != wt.size() || xc.size() != wc.size()) {
    throw Error("weighted KS: values and weights differ in length");
  }
  for (auto ws : {wt, wc}) {
    for (double w : ws) {
      if (!(w >= 0) || !std::isfinite(w)) throw Error("weighted KS: weights must be finite and >= 0");
    }
  }
}

// Split the column of covariate `c` by arm.
void arm_values(const TreatmentPair& pair, std::size_t var, std::span<const double> weights,
                std::vector<double>& xt, std::vector<double>& wt, std::vector<double>& xc,
                std::vector<double>& wc) {
  auto col = pair.data.column(var);
  for (std::size_t r = 0; r < col.size(); ++r) {
    const double w = weights.empty() ? 1.0 : weights[r];
    if (pair.indicator[r]) {
      xt.push_back(col[r]);
      wt.push_back(w);
    } else {
      xc.push_back(col[r]);
      wc.push_back(w);
    }
  }
}

}  // namespace

FeatureMatrix covariate_features(const TreatmentPair& pair, std::span<const std::string> covariates,
                                 bool with_treatment) {
  const Schema& schema = pair.data.schema();
  std::vector<FeatureSpec> specs;
  std::vector<std::vector<double>> cols;
  for (const auto& name : covariates) {
    const std::size_t v = schema.index_of(name);
    const auto& spec = schema[v];
    if (v == schema.treatment_index() || v == schema.outcome_index()) {
      throw Error("'" + name + "' is the treatment or outcome, not a covariate");
    }
    specs.push_back({spec.name, spec.kind == VariableKind::kCategorical, spec.num_levels()});
    auto col = pair.data.column(v);
    cols.emplace_back(col.begin(), col.end());
  }
  if (with_treatment) {
    specs.push_back({kTreatmentFeature, true, 2});
    cols.emplace_back(pair.indicator.begin(), pair.indicator.end());
  }
  if (cols.empty()) return FeatureMatrix(pair.indicator.size());
  return FeatureMatrix(std::move(specs), std::move(cols));
}

std::vector<int> binary_outcome(const Dataset& data) {
  const std::size_t s = data.schema().outcome_index();
  const auto& spec = data.schema()[s];
  if (spec.kind != VariableKind::kCategorical || spec.num_levels() != 2) {
    throw Error("outcome '" + spec.name + "' must be a binary categorical variable");
  }
  auto one = spec.level_index("1");
  if (!one) throw Error("outcome '" + spec.name + "' has no level \"1\"");
  std::vector<int> y(data.num_rows());
  for (std::size_t r = 0; r < y.size(); ++r) y[r] = data.code(r, s) == *one ? 1 : 0;
  return y;
}

double weighted_ks_statistic(std::span<const double> x_treated, std::span<const double> w_treated,
                             std::span<const double> x_control, std::span<const double> w_control) {
  check_ks_inputs(x_treated, w_treated, x_control, w_control);
  PooledSample pooled(x_treated, w_treated, x_control, w_control);
  return pooled.statistic(pooled.group);
}

KsResult weighted_ks(std::span<const double> x_treated, std::span<const double> w_treated,
                     std::span<const double> x_control, std::span<const double> w_control,
                     int permutations, std::uint64_t seed) {
  check_ks_inputs(x_treated, w_treated, x_control, w_control);
  PooledSample pooled(x_treated, w_treated, x_control, w_control);
  KsResult out;
  out.statistic = pooled.statistic(pooled.group);
  if (permutations <= 0) return out;
  Rng rng = make_rng(seed, 0x6B5);
  std::vector<int> labels = pooled.group;
  int extreme = 0;
  for (int p = 0; p < permutations; ++p) {
    for (std::size_t i = labels.size(); i > 1; --i) {
      std::swap(labels[i - 1], labels[uniform_index(rng, i)]);
    }
    if (pooled.statistic(labels) >= out.statistic - 1e-12) ++extreme;
  }
  out.p_value = (1.0 + extreme) / (1.0 + permutations);
  return out;
}

PropensityFit fit_propensity(const TreatmentPair& pair, std::span<const std::string> covariates,
                             const BoostConfig& cfg) {
  require_arms(pair, 2);
  const FeatureMatrix x = covariate_features(pair, covariates, false);
  PropensityFit out;
  out.covariates.assign(covariates.begin(), covariates.end());
  out.indicator = pair.indicator;
  out.model = fit(x, pair.indicator, {}, cfg);

  const PatternIndex patterns(x);
  const std::size_t np = patterns.size();
  const std::size_t nc = covariates.size();
  std::vector<double> n_treated(np, 0.0), n_control(np, 0.0);
  for (std::size_t r = 0; r < pair.indicator.size(); ++r) {
    (pair.indicator[r] ? n_treated : n_control)[patterns.pattern_of[r]] += 1.0;
  }
  std::vector<std::vector<double>> values(nc, std::vector<double>(np));
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t p = 0; p < np; ++p) values[c][p] = patterns.rows[p][c];
  }

  std::vector<double> wt(np), wc(np);
  auto ks_at = [&](std::span<const double> pi, std::vector<double>& per_cov) {
    for (std::size_t p = 0; p < np; ++p) {
      wt[p] = pi.empty() ? n_treated[p] : n_treated[p] / pi[p];
      wc[p] = pi.empty() ? n_control[p] : n_control[p] / (1.0 - pi[p]);
    }
    per_cov.assign(nc, 0.0);
    double worst = 0;
    for (std::size_t c = 0; c < nc; ++c) {
      per_cov[c] = weighted_ks_statistic(values[c], wt, values[c], wc);
      worst = std::max(worst, per_cov[c]);
    }
    return worst;
  };

  ks_at({}, out.balance_before);

  bool all_constant = true;
  for (std::size_t c = 0; c < nc && all_constant; ++c) {
    all_constant = std::all_of(values[c].begin(), values[c].end(),
                               [&](double v) { return v == values[c][0]; });
  }
  out.balance_undefined = all_constant;

  const int m_total = out.model.num_trees();
  const int stride = std::max(1, (m_total + kMaxBalanceEvaluations - 1) / kMaxBalanceEvaluations);
  std::vector<double> score(np, out.model.initial_score());
  std::vector<double> pi(np);
  std::vector<double> per_cov;
  double best = std::numeric_limits<double>::infinity();
  int best_stage = std::min(1, m_total);
  for (int m = 1; m <= m_total; ++m) {
    const auto& tree = out.model.trees()[m - 1];
    for (std::size_t p = 0; p < np; ++p) {
      score[p] += out.model.shrinkage() * tree.evaluate(patterns.rows[p]);
    }
    if (out.balance_undefined) break;
    if (m != 1 && m != m_total && m % stride != 0) continue;
    for (std::size_t p = 0; p < np; ++p) pi[p] = clamp_probability(logistic(score[p]));
    const double worst = ks_at(pi, per_cov);
    out.balance_trace.emplace_back(m, worst);
    if (worst < best) {
      best = worst;
      best_stage = m;
    }
  }
  out.selected_stage = best_stage;

  for (std::size_t p = 0; p < np; ++p) {
    pi[p] = out.model.predict_proba(patterns.rows[p], best_stage);
  }
  ks_at(pi, out.balance_after);
  out.pi.resize(pair.indicator.size());
  for (std::size_t r = 0; r < out.pi.size(); ++r) out.pi[r] = pi[patterns.pattern_of[r]];
  return out;
}

double ipw_weight(double pi, bool treated) {
  pi = clamp_probability(pi);
  return treated ? 1.0 / pi : 1.0 / (1.0 - pi);
}

WeightVector ipw_weights(const PropensityFit& fit) {
  WeightVector out;
  out.w.resize(fit.pi.size());
  for (std::size_t r = 0; r < fit.pi.size(); ++r) out.w[r] = ipw_weight(fit.pi[r], fit.indicator[r]);
  return out;
}

std::vector<BalanceRow> balance_table(const TreatmentPair& pair,
                                      std::span<const std::string> covariates,
                                      const WeightVector& weights, const BalanceOptions& opts) {
  require_arms(pair, 1);
  if (!weights.w.empty() && weights.w.size() != pair.indicator.size()) {
    throw Error("balance_table: weight vector length differs from rows");
  }
  std::vector<BalanceRow> table;
  for (std::size_t i = 0; i < covariates.size(); ++i) {
    const std::size_t var = pair.data.schema().index_of(covariates[i]);
    std::vector<double> xt, wt, xc, wc;
    arm_values(pair, var, {}, xt, wt, xc, wc);
    const KsResult before = weighted_ks(xt, wt, xc, wc, opts.permutations,
                                        substream_seed(opts.seed, 2 * i));
    xt.clear(), wt.clear(), xc.clear(), wc.clear();
    arm_values(pair, var, weights.w, xt, wt, xc, wc);
    const KsResult after = weighted_ks(xt, wt, xc, wc, opts.permutations,
                                       substream_seed(opts.seed, 2 * i + 1));
    table.push_back({covariates[i], before.statistic, after.statistic, before.p_value,
                     after.p_value, after.p_value < opts.threshold});
  }
  return table;
}

std::vector<BalanceRow> balance_table(const TreatmentPair& pair, const PropensityFit& fit,
                                      const BalanceOptions& opts) {
  return balance_table(pair, fit.covariates, ipw_weights(fit), opts);
}

nlohmann::json to_json(const std::vector<BalanceRow>& table) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : table) {
    out.push_back({{"covariate", row.covariate},
                   {"ks_before", row.ks_before},
                   {"ks_after", row.ks_after},
                   {"p_before", row.p_before},
                   {"p_after", row.p_after},
                   {"unbalanced", row.unbalanced}});
  }
  return out;
}

std::vector<BalanceRow> balance_from_json(const nlohmann::json& doc) {
  std::vector<BalanceRow> table;
  try {
    for (const auto& row : doc) {
      table.push_back({row.at("covariate").get<std::string>(), row.at("ks_before").get<double>(),
                       row.at("ks_after").get<double>(), row.at("p_before").get<double>(),
                       row.at("p_after").get<double>(), row.value("unbalanced", false)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("balance json: ") + e.what());
  }
  return table;
}

MatchResult match_on_logit(std::span<const double> logit_pi, std::span<const int> indicator,
                           double caliper) {
  if (!(caliper > 0)) throw Error("match_pairs: caliper must be > 0");
  if (logit_pi.size() != indicator.size()) throw Error("match_pairs: length mismatch");
  const std::size_t n = logit_pi.size();
  std::vector<std::size_t> treated, control;
  for (std::size_t r = 0; r < n; ++r) (indicator[r] ? treated : control).push_back(r);
  if (treated.empty() || control.empty()) throw Error("match_pairs: an arm is empty");

  double mean = std::accumulate(logit_pi.begin(), logit_pi.end(), 0.0) / n;
  double ss = 0;
  for (double v : logit_pi) ss += (v - mean) * (v - mean);
  const double sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  const double max_distance = caliper * sd;

  MatchResult out;
  std::vector<char> used(control.size(), 0);
  for (std::size_t t : treated) {
    std::size_t best = control.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < control.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(logit_pi[t] - logit_pi[control[j]]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best < control.size() && best_d <= max_distance) {
      used[best] = 1;
      out.pairs.emplace_back(t, control[best]);
    }
  }
  out.discarded = n - 2 * out.pairs.size();
  out.discard_fraction = static_cast<double>(out.discarded) / static_cast<double>(n);
  out.no_matches = out.pairs.empty();
  for (const auto& [t, c] : out.pairs) {
    out.rows.push_back(t);
    out.rows.push_back(c);
  }
  std::sort(out.rows.begin(), out.rows.end());
  return out;
}

MatchResult match_pairs(const PropensityFit& fit, double caliper) {
  std::vector<double> logit(fit.pi.size());
  for (std::size_t r = 0; r < logit.size(); ++r) logit[r] = std::log(fit.pi[r] / (1.0 - fit.pi[r]));
  return match_on_logit(logit, fit.indicator, caliper);
}

OutcomeModel fit_outcome_model(const TreatmentPair& pair, const WeightVector& weights,
                               std::span<const std::string> covariates, const BoostConfig& cfg) {
  require_arms(pair, 1);
  if (!weights.w.empty() && weights.w.size() != pair.indicator.size()) {
    throw Error("fit_outcome_model: weight vector length differs from rows");
  }
  const FeatureMatrix x = covariate_features(pair, covariates, true);
  const std::vector<int> y = binary_outcome(pair.data);
  OutcomeModel out;
  out.covariates.assign(covariates.begin(), covariates.end());
  out.model = fit(x, y, weights.w, cfg);
  out.stage = out.model.has_cv() ? select_stage_cv(out.model) : out.model.num_trees();
  return out;
}

std::vector<double> counterfactual_predictions(const OutcomeModel& model, const TreatmentPair& pair,
                                               int t) {
  if (t != 0 && t != 1) throw Error("counterfactual_predictions: t must be 0 or 1");
  const FeatureMatrix x = covariate_features(pair, model.covariates, false);
  if (x.num_features() + 1 != model.model.features().size()) {
    throw Error("counterfactual_predictions: covariates do not match the model");
  }
  const PatternIndex patterns(x);
  std::vector<double> per_pattern(patterns.size());
  std::vector<double> row;
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    row = patterns.rows[p];
    row.push_back(t);
    per_pattern[p] = model.model.predict_proba(row, model.stage);
  }
  std::vector<double> out(x.num_rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = per_pattern[patterns.pattern_of[r]];
  return out;
}

RiskRatio ace_combined(const TreatmentPair& pair, const OutcomeModel& model) {
  const auto p1 = counterfactual_predictions(model, pair, 1);
  const auto p0 = counterfactual_predictions(model, pair, 0);
  RiskRatio rr;
  rr.risk_treated = std::accumulate(p1.begin(), p1.end(), 0.0) / p1.size();
  rr.risk_control = std::accumulate(p0.begin(), p0.end(), 0.0) / p0.size();
  if (!(rr.risk_control > 0)) throw Error("ace_combined: control risk is zero");
  rr.ratio = rr.risk_treated / rr.risk_control;
  return rr;
}

RiskRatio ace_individual(const TreatmentPair& pair, const OutcomeModel& model,
                         std::span<const double> weights) {
  require_arms(pair, 1);
  if (!weights.empty() && weights.size() != pair.indicator.size()) {
    throw Error("ace_individual: weight vector length differs from rows");
  }
  const auto p1 = counterfactual_predictions(model, pair, 1);
  const auto p0 = counterfactual_predictions(model, pair, 0);
  double num = 0, num_w = 0, den = 0, den_w = 0;
  for (std::size_t r = 0; r < p1.size(); ++r) {
    const double w = weights.empty() ? 1.0 : weights[r];
    if (pair.indicator[r]) {
      num += w * p1[r];
      num_w += w;
    } else {
      den += w * p0[r];
      den_w += w;
    }
  }
  RiskRatio rr;
  rr.risk_treated = num / num_w;
  rr.risk_control = den / den_w;
  if (!(rr.risk_control > 0)) throw Error("ace_individual: control risk is zero");
  rr.ratio = rr.risk_treated / rr.risk_control;
  return rr;
}

RiskRatio naive_risk_ratio(const TreatmentPair& pair) {
  require_arms(pair, 1);
  const auto y = binary_outcome(pair.data);
  double st = 0, sc = 0;
  for (std::size_t r = 0; r < y.size(); ++r) (pair.indicator[r] ? st : sc) += y[r];
  RiskRatio rr;
  rr.risk_treated = st / pair.num_treated();
  rr.risk_control = sc / pair.num_control();
  if (!(rr.risk_control > 0)) throw Error("naive_risk_ratio: no outcomes among controls");
  rr.ratio = rr.risk_treated / rr.risk_control;
  return rr;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw Error("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double h = (values.size() - 1) * std::clamp(prob, 0.0, 1.0);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

Interval bootstrap_ci(const TreatmentPair& pair, const AcePipeline& pipeline, int replications,
                      double level, std::uint64_t seed, std::vector<double>* replicates) {
  if (replications < 2) throw Error("bootstrap_ci: need >= 2 replications");
  if (!(level > 0 && level < 1)) throw Error("bootstrap_ci: level must be in (0, 1)");
  require_arms(pair, 1);
  const std::size_t n = pair.indicator.size();
  std::vector<double> values(replications);
  parallel_for(static_cast<std::size_t>(replications), [&](std::size_t b) {
    Rng rng = make_rng(seed, b);
    std::vector<std::size_t> rows(n);
    for (int attempt = 0;; ++attempt) {
      std::size_t treated = 0;
      for (auto& r : rows) {
        r = uniform_index(rng, n);
        treated += pair.indicator[r];
      }
      if (treated > 0 && treated < n) break;
      if (attempt >= kMaxEmptyArmRedraws) {
        throw Error("bootstrap_ci: resample kept an empty arm after " +
                    std::to_string(kMaxEmptyArmRedraws) + " redraws");
      }
    }
    values[b] = pipeline(pair.subset(rows));
  });
  const double tail = (1.0 - level) / 2.0;
  Interval out{quantile(values, tail), quantile(values, 1.0 - tail)};
  if (replicates) *replicates = std::move(values);
  return out;
}

RiskRatio po_point_estimate(const TreatmentPair& pair, std::span<const std::string> covariates,
                            Method method, const PoConfig& cfg) {
  const PropensityFit fit = fit_propensity(pair, covariates, cfg.propensity);
  switch (method) {
    case Method::kIpwCombined:
    case Method::kIpwIndividual: {
      const WeightVector w = ipw_weights(fit);
      const OutcomeModel om = fit_outcome_model(pair, w, covariates, cfg.outcome);
      return method == Method::kIpwCombined ? ace_combined(pair, om)
                                            : ace_individual(pair, om, w.w);
    }
    case Method::kMatchCombined:
    case Method::kMatchIndividual: {
      const MatchResult match = match_pairs(fit, cfg.caliper);
      if (match.no_matches) throw Error("matching retained no pairs within the caliper");
      const TreatmentPair matched = pair.subset(match.rows);
      const OutcomeModel om = fit_outcome_model(matched, {}, covariates, cfg.outcome);
      return method == Method::kMatchCombined ? ace_combined(matched, om)
                                              : ace_individual(matched, om);
    }
    case Method::kCbn:
      break;
  }
  throw Error("po_point_estimate: '" + std::string(to_string(method)) +
              "' is not a potential-outcome method");
}

AceEstimate estimate_po_method(const TreatmentPair& pair, std::span<const std::string> covariates,
                               Method method, const PoConfig& cfg, const PropensityFit& fit) {
  AceEstimate est;
  est.treated = pair.treated_level;
  est.control = pair.control_level;
  est.method = method;
  const RiskRatio rr = po_point_estimate(pair, covariates, method, cfg);
  est.point = rr.ratio;
  est.risk_treated = rr.risk_treated;
  est.risk_control = rr.risk_control;
  est.n_used = pair.indicator.size();
  if (method == Method::kMatchCombined || method == Method::kMatchIndividual) {
    const MatchResult match = match_pairs(fit, cfg.caliper);
    est.n_used = match.rows.size();
    est.discard_fraction = match.discard_fraction;
  }
  const Interval ci = bootstrap_ci(
      pair,
      [&](const TreatmentPair& resample) {
        return po_point_estimate(resample, covariates, method, cfg).ratio;
      },
      cfg.bootstrap, cfg.level, substream_seed(cfg.seed, static_cast<std::uint64_t>(method)));
  est.lower = ci.lower;
  est.upper = ci.upper;
  return est;
}

PoResult estimate_potential_outcomes(const TreatmentPair& pair,
                                     std::span<const std::string> covariates,
                                     std::span<const Method> methods, const PoConfig& cfg) {
  PoResult out;
  const PropensityFit fit = fit_propensity(pair, covariates, cfg.propensity);
  out.balance = balance_table(pair, fit, cfg.balance);
  for (Method method : methods) {
    if (method == Method::kCbn) continue;
    if ((method == Method::kMatchCombined || method == Method::kMatchIndividual) && !out.match) {
      out.match = match_pairs(fit, cfg.caliper);
    }
    out.estimates.push_back(estimate_po_method(pair, covariates, method, cfg, fit));
  }
  return out;
}

}  // namespace causeway
