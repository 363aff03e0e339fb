#ifndef CAUSEWAY_POTENTIAL_OUTCOMES_H_
#define CAUSEWAY_POTENTIAL_OUTCOMES_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "causeway/ace.h"
#include "causeway/boosted_trees.h"
#include "causeway/data_model.h"

namespace causeway {

// Model inputs for the named covariates of a treatment pair, with the binary
// treatment indicator appended as a last categorical feature when
// `with_treatment` is set.
FeatureMatrix covariate_features(const TreatmentPair& pair, std::span<const std::string> covariates,
                                 bool with_treatment);

// 0/1 outcome per row: 1 iff the outcome variable equals level "1".
std::vector<int> binary_outcome(const Dataset& data);

// ---------------------------------------------------------------------------
// Balance diagnostics

struct KsResult {
  double statistic = 0;
  double p_value = 1;
};

// sup_v |F_T(v) - F_C(v)| for weight-normalized empirical CDFs.
double weighted_ks_statistic(std::span<const double> x_treated, std::span<const double> w_treated,
                             std::span<const double> x_control, std::span<const double> w_control);

// Statistic plus a permutation p-value: group labels are shuffled with each
// value keeping its weight, p = (1 + #{perm >= observed}) / (1 + permutations).
// permutations = 0 reports p = 1.
KsResult weighted_ks(std::span<const double> x_treated, std::span<const double> w_treated,
                     std::span<const double> x_control, std::span<const double> w_control,
                     int permutations = 1000, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Propensity scores

struct PropensityFit {
  BoostModel model;
  std::vector<std::string> covariates;
  // Stage whose weights minimize the largest weighted KS statistic.
  int selected_stage = 1;
  // Clamped P(T = 1 | X) per row of the pair, at the selected stage.
  std::vector<double> pi;
  std::vector<int> indicator;
  // Per-covariate KS statistic, unweighted and at the selected stage.
  std::vector<double> balance_before;
  std::vector<double> balance_after;
  // Set when every covariate is constant and balance cannot discriminate
  // between stages.
  bool balance_undefined = false;
  // (stage, max KS) at every evaluated stage.
  std::vector<std::pair<int, double>> balance_trace;
};

// Upper bound on how many stages the balance search evaluates; larger models
// are scanned on an even stride that always includes the last stage.
inline constexpr int kMaxBalanceEvaluations = 500;

PropensityFit fit_propensity(const TreatmentPair& pair, std::span<const std::string> covariates,
                             const BoostConfig& cfg);

struct WeightVector {
  std::vector<double> w;
};

// Population (ATE) weights: 1/pi for treated rows, 1/(1 - pi) for controls.
double ipw_weight(double pi, bool treated);
WeightVector ipw_weights(const PropensityFit& fit);

struct BalanceRow {
  std::string covariate;
  double ks_before = 0;
  double ks_after = 0;
  double p_before = 1;
  double p_after = 1;
  // p_after below the threshold.
  bool unbalanced = false;
};

struct BalanceOptions {
  int permutations = 1000;
  double threshold = 0.05;
  std::uint64_t seed = 0;
};

std::vector<BalanceRow> balance_table(const TreatmentPair& pair,
                                      std::span<const std::string> covariates,
                                      const WeightVector& weights, const BalanceOptions& opts = {});
std::vector<BalanceRow> balance_table(const TreatmentPair& pair, const PropensityFit& fit,
                                      const BalanceOptions& opts = {});
nlohmann::json to_json(const std::vector<BalanceRow>& table);
std::vector<BalanceRow> balance_from_json(const nlohmann::json& doc);

// ---------------------------------------------------------------------------
// Matching baseline

struct MatchResult {
  // (treated row, control row) in matching order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t discarded = 0;
  double discard_fraction = 0;
  // Set when the caliper excluded every candidate pair.
  bool no_matches = false;
  // Retained rows of the pair, ascending.
  std::vector<std::size_t> rows;
};

// Greedy 1:1 nearest-neighbour matching without replacement on logit(pi).
// Treated rows are visited in row order and take the closest unused control
// (lowest row on ties) when the distance is at most caliper * sd(logit pi).
MatchResult match_on_logit(std::span<const double> logit_pi, std::span<const int> indicator,
                           double caliper);
MatchResult match_pairs(const PropensityFit& fit, double caliper);

// ---------------------------------------------------------------------------
// Outcome model and effect estimates

struct OutcomeModel {
  BoostModel model;
  std::vector<std::string> covariates;
  // CV-selected stage, or all trees when fitted without CV.
  int stage = 0;
};

// Single weighted boosted model of the outcome on covariates plus the
// treatment indicator. `weights` may be empty (unit weights).
OutcomeModel fit_outcome_model(const TreatmentPair& pair, const WeightVector& weights,
                               std::span<const std::string> covariates, const BoostConfig& cfg);

// Predicted P(S = 1 | x_i, t) for every row with the indicator forced to t.
std::vector<double> counterfactual_predictions(const OutcomeModel& model, const TreatmentPair& pair,
                                               int t);

struct RiskRatio {
  double risk_treated = 0;
  double risk_control = 0;
  double ratio = 1;
};

// Both potential outcomes predicted for every row.
RiskRatio ace_combined(const TreatmentPair& pair, const OutcomeModel& model);
// Treated rows predict under treatment, controls under control. With
// `weights` the arm averages are weighted (the IPW form); empty weights give
// plain arm means.
RiskRatio ace_individual(const TreatmentPair& pair, const OutcomeModel& model,
                         std::span<const double> weights = {});
// Ratio of observed outcome rates, no adjustment.
RiskRatio naive_risk_ratio(const TreatmentPair& pair);

// ---------------------------------------------------------------------------
// Bootstrap

struct Interval {
  double lower = 0;
  double upper = 0;
};

// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> values, double prob);

// Replayable estimation procedure: maps a (resampled) pair to an ACE.
using AcePipeline = std::function<double(const TreatmentPair&)>;

inline constexpr int kMaxEmptyArmRedraws = 10;

// Percentile interval of `pipeline` over `replications` row resamples drawn
// with replacement. Resamples with an empty arm are redrawn. Replications run
// in parallel on independent substreams of `seed`.
Interval bootstrap_ci(const TreatmentPair& pair, const AcePipeline& pipeline, int replications,
                      double level, std::uint64_t seed, std::vector<double>* replicates = nullptr);

// ---------------------------------------------------------------------------
// End-to-end estimation for one comparison

struct PoConfig {
  BoostConfig propensity;
  BoostConfig outcome;
  double caliper = 0.2;
  BalanceOptions balance;
  int bootstrap = 200;
  double level = 0.95;
  std::uint64_t seed = 1;
};

struct PoResult {
  std::vector<AceEstimate> estimates;
  std::vector<BalanceRow> balance;
  std::optional<MatchResult> match;
};

// Point estimate of one method on `pair`; the unit the bootstrap replays.
RiskRatio po_point_estimate(const TreatmentPair& pair, std::span<const std::string> covariates,
                            Method method, const PoConfig& cfg);

// One method with its bootstrap interval. `fit` is the propensity fit on the
// full pair (used for the matching discard fraction).
AceEstimate estimate_po_method(const TreatmentPair& pair, std::span<const std::string> covariates,
                               Method method, const PoConfig& cfg, const PropensityFit& fit);

// Runs the requested potential-outcome methods (kCbn is ignored) with
// bootstrap intervals and a balance table.
PoResult estimate_potential_outcomes(const TreatmentPair& pair,
                                     std::span<const std::string> covariates,
                                     std::span<const Method> methods, const PoConfig& cfg);

}  // namespace causeway

#endif  // CAUSEWAY_POTENTIAL_OUTCOMES_H_
