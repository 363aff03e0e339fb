#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "causeway/error.h"
#include "causeway/potential_outcomes.h"
#include "causeway/rng.h"
#include "causeway/synth_oracle.h"
#include "test_support.h"

namespace causeway {
namespace {

// Brute force: evaluate both weighted step CDFs at every observed value.
double ks_oracle(const std::vector<double>& xt, const std::vector<double>& wt,
                 const std::vector<double>& xc, const std::vector<double>& wc) {
  std::vector<double> grid = xt;
  grid.insert(grid.end(), xc.begin(), xc.end());
  const double st = std::accumulate(wt.begin(), wt.end(), 0.0);
  const double sc = std::accumulate(wc.begin(), wc.end(), 0.0);
  double best = 0;
  for (double v : grid) {
    double ft = 0, fc = 0;
    for (std::size_t i = 0; i < xt.size(); ++i) ft += xt[i] <= v ? wt[i] : 0;
    for (std::size_t i = 0; i < xc.size(); ++i) fc += xc[i] <= v ? wc[i] : 0;
    best = std::max(best, std::abs(ft / st - fc / sc));
  }
  return best;
}

// Treatment "t"/"c", outcome S, continuous covariates named in `covs`.
TreatmentPair make_pair(const std::vector<int>& t, const std::vector<int>& y,
                        const std::vector<std::pair<std::string, std::vector<double>>>& covs) {
  std::vector<VariableSpec> specs;
  VariableSpec ts;
  ts.name = "T";
  ts.levels = {"c", "t"};
  ts.role = VariableRole::kTreatment;
  VariableSpec ys;
  ys.name = "S";
  ys.levels = {"0", "1"};
  ys.role = VariableRole::kOutcome;
  specs = {ts, ys};
  std::vector<std::vector<double>> cols = {std::vector<double>(t.begin(), t.end()),
                                           std::vector<double>(y.begin(), y.end())};
  for (const auto& [name, values] : covs) {
    VariableSpec c;
    c.name = name;
    c.kind = VariableKind::kContinuous;
    specs.push_back(c);
    cols.push_back(values);
  }
  return split_treatment_pair(Dataset(Schema(specs), cols), "t", "c");
}

// X in {0,1,2} drives both treatment and outcome.
GroundTruth confounded_truth(bool randomized) {
  using testing::make_truth;
  std::vector<std::vector<double>> t_rows = randomized
                                                ? std::vector<std::vector<double>>{{0.5, 0.5}}
                                                : std::vector<std::vector<double>>{
                                                      {0.85, 0.15}, {0.5, 0.5}, {0.15, 0.85}};
  std::vector<Edge> edges = {{0, 2}, {1, 2}};
  if (!randomized) edges.push_back({0, 1});
  return make_truth({{"X", {"0", "1", "2"}, {{0.4, 0.3, 0.3}}},
                     {"T", {"c", "t"}, t_rows},
                     {"S", {"0", "1"},
                      {{0.9, 0.1}, {0.8, 0.2}, {0.7, 0.3}, {0.55, 0.45}, {0.5, 0.5}, {0.3, 0.7}}}},
                    edges, "T", "S");
}

BoostConfig small_boost() {
  BoostConfig cfg;
  cfg.max_trees = 300;
  cfg.shrinkage = 0.05;
  cfg.interaction_depth = 2;
  cfg.min_node = 10;
  return cfg;
}

const std::vector<std::string> kX = {"X"};

TEST(WeightedKs, IdenticalSamplesGiveZero) {
  std::vector<double> x = {3, 1, 2, 2}, w(4, 1.0);
  EXPECT_DOUBLE_EQ(weighted_ks_statistic(x, w, x, w), 0.0);
  auto r = weighted_ks(x, w, x, w, 200, 1);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(WeightedKs, DisjointSupportsGiveOne) {
  std::vector<double> a = {1, 2}, b = {3, 4}, w(2, 1.0);
  EXPECT_DOUBLE_EQ(weighted_ks_statistic(a, w, b, w), 1.0);
}

TEST(WeightedKs, InterleavedGiveHalf) {
  std::vector<double> a = {1, 3}, b = {2, 4}, w(2, 1.0);
  EXPECT_DOUBLE_EQ(weighted_ks_statistic(a, w, b, w), 0.5);
}

TEST(WeightedKs, MatchesBruteForceWithTiesAndWeights) {
  Rng rng = make_rng(21, 0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> xt, wt, xc, wc;
    const int nt = 1 + static_cast<int>(uniform_index(rng, 12));
    const int nc = 1 + static_cast<int>(uniform_index(rng, 12));
    for (int i = 0; i < nt; ++i) {
      xt.push_back(static_cast<double>(uniform_index(rng, 5)));
      wt.push_back(uniform01(rng) + 0.01);
    }
    for (int i = 0; i < nc; ++i) {
      xc.push_back(static_cast<double>(uniform_index(rng, 5)));
      wc.push_back(uniform01(rng) + 0.01);
    }
    EXPECT_NEAR(weighted_ks_statistic(xt, wt, xc, wc), ks_oracle(xt, wt, xc, wc), 1e-12);
  }
}

TEST(WeightedKs, PermutationPValue) {
  std::vector<double> a = {1, 2, 3, 4, 5, 6}, b = {11, 12, 13, 14, 15, 16}, w(6, 1.0);
  // Complete separation: only the identity labelling (and its mirror) reach 1.
  auto r = weighted_ks(a, w, b, w, 999, 3);
  EXPECT_DOUBLE_EQ(r.statistic, 1.0);
  EXPECT_LT(r.p_value, 0.02);
  EXPECT_DOUBLE_EQ(weighted_ks(a, w, b, w, 0, 3).p_value, 1.0);
  EXPECT_EQ(weighted_ks(a, w, b, w, 99, 3).p_value, weighted_ks(a, w, b, w, 99, 3).p_value);
}

TEST(WeightedKs, RejectsBadInput) {
  std::vector<double> a = {1}, w = {-1}, ok = {1};
  EXPECT_THROW(weighted_ks_statistic(a, w, a, ok), Error);
  EXPECT_THROW(weighted_ks_statistic({}, {}, a, ok), Error);
}

TEST(IpwWeights, Formula) {
  EXPECT_DOUBLE_EQ(ipw_weight(0.5, true), 2.0);
  EXPECT_DOUBLE_EQ(ipw_weight(0.25, true), 4.0);
  EXPECT_DOUBLE_EQ(ipw_weight(0.25, false), 4.0 / 3.0);
  const double clamped = clamp_probability(1.0);
  EXPECT_DOUBLE_EQ(clamped, 1.0 - 1e-6);
  EXPECT_NEAR(ipw_weight(clamped, false), 1e6, 1e-3);
  EXPECT_TRUE(std::isfinite(ipw_weight(clamp_probability(0.0), true)));
}

TEST(Matching, HandTrace) {
  // rows 0, 1 treated at logits 0 and 1; controls at 0.1, 0.9, 5
  std::vector<double> logit = {0, 1, 0.1, 0.9, 5};
  std::vector<int> ind = {1, 1, 0, 0, 0};
  // caliper 0.5 sd with sd = sqrt(17.02 / 4)
  auto m = match_on_logit(logit, ind, 0.5);
  ASSERT_EQ(m.pairs.size(), 2u);
  EXPECT_EQ(m.pairs[0], std::make_pair(std::size_t{0}, std::size_t{2}));
  EXPECT_EQ(m.pairs[1], std::make_pair(std::size_t{1}, std::size_t{3}));
  EXPECT_EQ(m.discarded, 1u);
  EXPECT_DOUBLE_EQ(m.discard_fraction, 0.2);
  EXPECT_EQ(m.rows, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_FALSE(m.no_matches);
}

TEST(Matching, IdenticalScoresMatchTheSmallerArm) {
  std::vector<double> logit(9, 0.3);
  std::vector<int> ind = {1, 0, 0, 1, 0, 0, 0, 1, 0};
  auto m = match_on_logit(logit, ind, 0.2);
  EXPECT_EQ(m.pairs.size(), 3u);
  EXPECT_EQ(m.discarded, 3u);
}

TEST(Matching, DisjointScoresBeyondCaliper) {
  std::vector<double> logit = {-5, -5.1, 5, 5.1};
  std::vector<int> ind = {1, 1, 0, 0};
  auto m = match_on_logit(logit, ind, 0.2);
  EXPECT_TRUE(m.no_matches);
  EXPECT_EQ(m.discard_fraction, 1.0);
  EXPECT_THROW(match_on_logit(logit, ind, 0.0), Error);
}

TEST(Propensity, ConfoundingIsReducedByWeighting) {
  auto data = sample_dataset(confounded_truth(false), 4000, 8);
  auto pair = split_treatment_pair(data, "t", "c");
  auto fit = fit_propensity(pair, kX, small_boost());
  ASSERT_EQ(fit.balance_before.size(), 1u);
  EXPECT_GT(fit.balance_before[0], 0.3);
  EXPECT_LT(fit.balance_after[0], 0.5 * fit.balance_before[0]);
  EXPECT_GE(fit.selected_stage, 1);
  EXPECT_LE(fit.selected_stage, fit.model.num_trees());
  EXPECT_EQ(fit.pi.size(), pair.indicator.size());
}

TEST(Propensity, RandomizedAssignmentStaysBalanced) {
  auto data = sample_dataset(confounded_truth(true), 4000, 8);
  auto pair = split_treatment_pair(data, "t", "c");
  auto fit = fit_propensity(pair, kX, small_boost());
  EXPECT_LT(fit.balance_before[0], 0.05);
  EXPECT_LT(std::abs(fit.balance_after[0] - fit.balance_before[0]), 0.02);
  auto table = balance_table(pair, fit, {200, 0.05, 4});
  ASSERT_EQ(table.size(), 1u);
  EXPECT_FALSE(table[0].unbalanced);
}

TEST(Propensity, ConstantCovariateHasZeroKs) {
  std::vector<int> t, y;
  std::vector<double> c, x;
  Rng rng = make_rng(2, 0);
  for (int i = 0; i < 200; ++i) {
    t.push_back(i % 2);
    y.push_back(uniform01(rng) < 0.3);
    c.push_back(4.0);
    x.push_back(uniform01(rng) + 0.3 * t.back());
  }
  auto pair = make_pair(t, y, {{"C", c}, {"X", x}});
  std::vector<std::string> covs = {"C", "X"};
  auto fit = fit_propensity(pair, covs, small_boost());
  EXPECT_DOUBLE_EQ(fit.balance_before[0], 0.0);
  EXPECT_DOUBLE_EQ(fit.balance_after[0], 0.0);
  std::vector<std::string> only_c = {"C"};
  auto flat = fit_propensity(pair, only_c, small_boost());
  EXPECT_TRUE(flat.balance_undefined);
}

TEST(Balance, WeightsOfOneFlagTheConfounder) {
  auto data = sample_dataset(confounded_truth(false), 2000, 12);
  auto pair = split_treatment_pair(data, "t", "c");
  WeightVector ones{std::vector<double>(pair.indicator.size(), 1.0)};
  auto table = balance_table(pair, kX, ones, {200, 0.05, 1});
  ASSERT_EQ(table.size(), 1u);
  EXPECT_TRUE(table[0].unbalanced);
  EXPECT_DOUBLE_EQ(table[0].ks_before, table[0].ks_after);
  std::vector<std::string> none;
  EXPECT_TRUE(balance_table(pair, none, ones).empty());
  auto back = balance_from_json(to_json(table));
  EXPECT_EQ(back[0].covariate, "X");
  EXPECT_DOUBLE_EQ(back[0].p_after, table[0].p_after);
}

TEST(OutcomeModel, NullOutcomeStaysNearBaseRate) {
  Rng rng = make_rng(31, 0);
  std::vector<int> t, y;
  std::vector<double> x;
  for (int i = 0; i < 3000; ++i) {
    t.push_back(uniform01(rng) < 0.5);
    y.push_back(uniform01(rng) < 0.25);
    x.push_back(uniform01(rng));
  }
  auto pair = make_pair(t, y, {{"X", x}});
  BoostConfig cfg = small_boost();
  cfg.max_trees = 300;
  cfg.shrinkage = 0.01;
  cfg.cv_folds = 5;  // pure noise: CV should stop before trees chase it
  auto model = fit_outcome_model(pair, {}, kX, cfg);
  const double base = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  for (int arm : {0, 1}) {
    for (double p : counterfactual_predictions(model, pair, arm)) EXPECT_NEAR(p, base, 0.03);
  }
}

TEST(OutcomeModel, OutcomeEqualToTreatmentSeparates) {
  std::vector<int> t, y;
  std::vector<double> x;
  for (int i = 0; i < 200; ++i) {
    t.push_back(i % 3 == 0);
    y.push_back(t.back());
    x.push_back(i * 0.01);
  }
  auto pair = make_pair(t, y, {{"X", x}});
  BoostConfig cfg = small_boost();
  cfg.max_trees = 500;
  cfg.shrinkage = 0.1;
  auto model = fit_outcome_model(pair, {}, kX, cfg);
  for (double p : counterfactual_predictions(model, pair, 1)) EXPECT_GT(p, 0.99);
  for (double p : counterfactual_predictions(model, pair, 0)) EXPECT_LT(p, 0.01);
}

TEST(OutcomeModel, TreatmentOnlyModelReproducesWeightedArmMeans) {
  Rng rng = make_rng(4, 0);
  std::vector<int> t, y;
  std::vector<double> w;
  for (int i = 0; i < 400; ++i) {
    t.push_back(i % 2);
    y.push_back(uniform01(rng) < (t.back() ? 0.6 : 0.2));
    w.push_back(0.5 + uniform01(rng));
  }
  auto pair = make_pair(t, y, {});
  double m1 = 0, s1 = 0, m0 = 0, s0 = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    (t[i] ? m1 : m0) += w[i] * y[i];
    (t[i] ? s1 : s0) += w[i];
  }
  BoostConfig cfg = small_boost();
  cfg.max_trees = 2000;
  cfg.shrinkage = 0.1;
  cfg.min_node = 1;
  std::vector<std::string> none;
  auto model = fit_outcome_model(pair, WeightVector{w}, none, cfg);
  EXPECT_NEAR(counterfactual_predictions(model, pair, 1)[0], m1 / s1, 1e-6);
  EXPECT_NEAR(counterfactual_predictions(model, pair, 0)[0], m0 / s0, 1e-6);
}

// Outcome model over (X, treatment) whose only split is on the treatment.
OutcomeModel constant_arm_model(double p_treated, double p_control) {
  RegressionTree tree;
  TreeNode root;
  root.feature = 1;
  root.categorical = true;
  root.left_levels = {0};
  root.left = 1;
  root.right = 2;
  TreeNode l, r;
  l.value = std::log(p_control / (1 - p_control));
  r.value = std::log(p_treated / (1 - p_treated));
  tree.nodes = {root, l, r};
  OutcomeModel m;
  m.model = make_model({{"X", false, 0}, {"treatment_indicator", true, 2}}, 0.0, 1.0, {tree});
  m.covariates = kX;
  m.stage = 1;
  return m;
}

TEST(AceCombined, ConstantPredictionsGiveTheirRatio) {
  auto pair = make_pair({1, 0, 1, 0, 0}, {1, 0, 0, 0, 1}, {{"X", {1, 2, 3, 4, 5}}});
  auto rr = ace_combined(pair, constant_arm_model(0.06, 0.02));
  EXPECT_NEAR(rr.risk_treated, 0.06, 1e-12);
  EXPECT_NEAR(rr.risk_control, 0.02, 1e-12);
  EXPECT_NEAR(rr.ratio, 3.0, 1e-10);
}

TEST(AceCombined, ModelIgnoringTreatmentGivesOne) {
  RegressionTree tree;
  TreeNode root;
  root.feature = 0;
  root.threshold = 2.5;
  root.left = 1;
  root.right = 2;
  TreeNode l, r;
  l.value = -1;
  r.value = 0.7;
  tree.nodes = {root, l, r};
  OutcomeModel m;
  m.model = make_model({{"X", false, 0}, {"treatment_indicator", true, 2}}, -0.5, 1.0, {tree});
  m.covariates = kX;
  m.stage = 1;
  auto pair = make_pair({1, 0, 1, 0, 0}, {1, 0, 0, 0, 1}, {{"X", {1, 2, 3, 4, 5}}});
  EXPECT_DOUBLE_EQ(ace_combined(pair, m).ratio, 1.0);
}

TEST(AceIndividual, PerfectPredictionsGiveArmOutcomeMeans) {
  // Outcome is a deterministic function of X, which the model reproduces.
  std::vector<int> t = {1, 1, 1, 0, 0, 0, 0, 1};
  std::vector<double> x = {0, 1, 1, 0, 0, 1, 0, 0};
  std::vector<int> y = {0, 1, 1, 0, 0, 1, 0, 0};
  auto pair = make_pair(t, y, {{"X", x}});
  RegressionTree tree;
  TreeNode root;
  root.feature = 0;
  root.threshold = 0.5;
  root.left = 1;
  root.right = 2;
  TreeNode l, r;
  l.value = -40;
  r.value = 40;
  tree.nodes = {root, l, r};
  OutcomeModel m;
  m.model = make_model({{"X", false, 0}, {"treatment_indicator", true, 2}}, 0.0, 1.0, {tree});
  m.covariates = kX;
  m.stage = 1;
  auto rr = ace_individual(pair, m);
  EXPECT_NEAR(rr.risk_treated, 2.0 / 4.0, 1e-5);
  EXPECT_NEAR(rr.risk_control, 1.0 / 4.0, 1e-5);
  auto naive = naive_risk_ratio(pair);
  EXPECT_NEAR(rr.ratio, naive.ratio, 1e-4);
}

TEST(AceIndividual, WeightedArmMeans) {
  auto pair = make_pair({1, 0, 1, 0}, {1, 0, 0, 1}, {{"X", {1, 2, 3, 4}}});
  auto m = constant_arm_model(0.3, 0.1);
  std::vector<double> w = {1, 2, 3, 4};
  auto rr = ace_individual(pair, m, w);
  EXPECT_NEAR(rr.risk_treated, 0.3, 1e-12);
  EXPECT_NEAR(rr.risk_control, 0.1, 1e-12);
  std::vector<double> wrong = {1, 2};
  EXPECT_THROW(ace_individual(pair, m, wrong), Error);
}

TEST(NaiveRiskRatio, ObservedRates) {
  auto pair = make_pair({1, 1, 1, 0, 0, 0, 0}, {1, 1, 0, 1, 0, 0, 0}, {});
  auto rr = naive_risk_ratio(pair);
  EXPECT_DOUBLE_EQ(rr.risk_treated, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rr.risk_control, 1.0 / 4.0);
  EXPECT_THROW(naive_risk_ratio(make_pair({1, 0}, {1, 0}, {})), Error);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile({5}, 0.975), 5.0);
  EXPECT_THROW(quantile({}, 0.5), Error);
}

TEST(Bootstrap, IdenticalRowsGiveZeroWidth) {
  // Rows are identical within each arm, so every resample has the same rates.
  auto pair = make_pair({1, 1, 1, 0, 0, 0}, {1, 1, 1, 1, 1, 1}, {});
  auto ci = bootstrap_ci(
      pair, [](const TreatmentPair& p) { return naive_risk_ratio(p).ratio; }, 50, 0.95, 3);
  EXPECT_DOUBLE_EQ(ci.lower, 1.0);
  EXPECT_DOUBLE_EQ(ci.upper, 1.0);
}

TEST(Bootstrap, OrderedDeterministicAndReplayable) {
  Rng rng = make_rng(6, 0);
  std::vector<int> t, y;
  for (int i = 0; i < 300; ++i) {
    t.push_back(uniform01(rng) < 0.5);
    y.push_back(uniform01(rng) < (t.back() ? 0.5 : 0.25));
  }
  auto pair = make_pair(t, y, {});
  AcePipeline naive = [](const TreatmentPair& p) { return naive_risk_ratio(p).ratio; };
  std::vector<double> reps_a, reps_b;
  auto a = bootstrap_ci(pair, naive, 200, 0.95, 9, &reps_a);
  bootstrap_ci(pair, naive, 200, 0.95, 9, &reps_b);
  EXPECT_LE(a.lower, a.upper);
  EXPECT_EQ(reps_a, reps_b);
  EXPECT_EQ(reps_a.size(), 200u);
  EXPECT_DOUBLE_EQ(a.lower, quantile(reps_a, 0.025));
  EXPECT_DOUBLE_EQ(a.upper, quantile(reps_a, 0.975));
  const double point = naive(pair);
  EXPECT_LT(a.lower, point);
  EXPECT_GT(a.upper, point);
  EXPECT_THROW(bootstrap_ci(pair, naive, 1, 0.95, 9), Error);
  EXPECT_THROW(bootstrap_ci(pair, naive, 10, 1.0, 9), Error);
}

TEST(Bootstrap, ResamplesAlwaysKeepBothArms) {
  // One treated row in 30: about a third of raw resamples miss it.
  std::vector<int> t(30, 0), y(30, 0);
  t[0] = 1;
  auto pair = make_pair(t, y, {});
  AcePipeline check = [](const TreatmentPair& p) {
    if (p.num_treated() == 0 || p.num_control() == 0) throw Error("empty arm reached pipeline");
    return static_cast<double>(p.num_treated());
  };
  std::vector<double> reps;
  auto ci = bootstrap_ci(pair, check, 40, 0.95, 5, &reps);
  EXPECT_EQ(reps.size(), 40u);
  EXPECT_GE(ci.lower, 1.0);
}

TEST(EndToEnd, RandomizedNullCoversOne) {
  auto gt = testing::make_truth({{"X", {"0", "1", "2"}, {{0.4, 0.3, 0.3}}},
                                 {"T", {"c", "t"}, {{0.5, 0.5}}},
                                 {"S", {"0", "1"}, {{0.8, 0.2}, {0.6, 0.4}, {0.4, 0.6}}}},
                                {{0, 2}}, "T", "S");
  auto pair = split_treatment_pair(sample_dataset(gt, 2000, 3), "t", "c");
  PoConfig cfg;
  cfg.propensity = small_boost();
  cfg.outcome = small_boost();
  cfg.bootstrap = 30;
  cfg.balance.permutations = 50;
  std::vector<Method> methods = {Method::kIpwIndividual, Method::kMatchCombined};
  auto res = estimate_potential_outcomes(pair, kX, methods, cfg);
  ASSERT_EQ(res.estimates.size(), 2u);
  for (const auto& e : res.estimates) {
    EXPECT_EQ(e.treated, "t");
    EXPECT_EQ(e.control, "c");
    EXPECT_LE(e.lower, e.upper);
    EXPECT_NEAR(e.point, 1.0, 0.15);
  }
  EXPECT_TRUE(res.estimates[0].interval_crosses_one());
  EXPECT_FALSE(res.estimates[0].discard_fraction.has_value());
  ASSERT_TRUE(res.estimates[1].discard_fraction.has_value());
  EXPECT_LT(*res.estimates[1].discard_fraction, 0.2);
  ASSERT_EQ(res.balance.size(), 1u);
}

TEST(EndToEnd, PointEstimateIsDeterministic) {
  auto pair = split_treatment_pair(sample_dataset(confounded_truth(false), 1500, 5), "t", "c");
  PoConfig cfg;
  cfg.propensity = small_boost();
  cfg.outcome = small_boost();
  auto a = po_point_estimate(pair, kX, Method::kIpwCombined, cfg);
  auto b = po_point_estimate(pair, kX, Method::kIpwCombined, cfg);
  EXPECT_EQ(a.ratio, b.ratio);
  EXPECT_THROW(po_point_estimate(pair, kX, Method::kCbn, cfg), Error);
}

}  // namespace
}  // namespace causeway
