#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "causeway/cbn_inference.h"
#include "causeway/error.h"
#include "causeway/factor.h"
#include "causeway/synth_oracle.h"
#include "test_support.h"

namespace causeway {
namespace {

using testing::make_truth;

GroundTruth chain_ab(double b1_given_a0 = 0.2, double b1_given_a1 = 0.9) {
  return make_truth({{"A", {"0", "1"}, {{0.7, 0.3}}},
                     {"B", {"0", "1"}, {{1 - b1_given_a0, b1_given_a0}, {1 - b1_given_a1, b1_given_a1}}}},
                    {{0, 1}}, "A", "B");
}

GroundTruth triangle() {
  return make_truth({{"X", {"0", "1", "2"}, {{0.5, 0.3, 0.2}}},
                     {"T", {"0", "1"}, {{0.8, 0.2}, {0.5, 0.5}, {0.3, 0.7}}},
                     {"S", {"0", "1"},
                      {{0.9, 0.1}, {0.7, 0.3}, {0.6, 0.4}, {0.2, 0.8}, {0.5, 0.5}, {0.1, 0.9}}}},
                    {{0, 1}, {0, 2}, {1, 2}}, "T", "S");
}

DiscreteData rows(const std::vector<std::vector<int>>& cols, std::vector<DiscreteVariable> vars) {
  DiscreteData d;
  d.variables = std::move(vars);
  d.columns = cols;
  return d;
}

TEST(FitCpts, PosteriorMeanArithmetic) {
  // a = 1 four times with b = 1 three times; a = 0 twice with b = 0
  auto d = rows({{1, 1, 1, 1, 0, 0}, {1, 1, 1, 0, 0, 0}}, {{"A", {"0", "1"}}, {"B", {"0", "1"}}});
  Dag g({"A", "B"}, std::vector<Edge>{{0, 1}});
  auto cpts = fit_cpts(d, g, 1.0);
  EXPECT_NEAR(cpts.tables[1].probs[1 * 2 + 1], 3.25 / 4.5, 1e-15);
  EXPECT_NEAR(cpts.tables[1].probs[0 * 2 + 0], 2.25 / 2.5, 1e-15);
  EXPECT_NEAR(cpts.tables[0].probs[1], 4.5 / 7.0, 1e-15);
  EXPECT_NEAR(cpts.tables[1].posterior[3], 3.25, 1e-15);
  cpts.validate(g);
}

TEST(FitCpts, NoDataGivesUniformRows) {
  auto d = rows({{}, {}}, {{"A", {"0", "1", "2"}}, {"B", {"0", "1"}}});
  Dag g({"A", "B"}, std::vector<Edge>{{0, 1}});
  auto cpts = fit_cpts(d, g);
  for (double p : cpts.tables[0].probs) EXPECT_DOUBLE_EQ(p, 1.0 / 3);
  for (double p : cpts.tables[1].probs) EXPECT_DOUBLE_EQ(p, 0.5);
}

TEST(FitCpts, UnseenParentConfigIsPriorMean) {
  auto d = rows({{0, 0, 0}, {1, 1, 0}}, {{"A", {"0", "1"}}, {"B", {"0", "1", "2"}}});
  Dag g({"A", "B"}, std::vector<Edge>{{0, 1}});
  auto cpts = fit_cpts(d, g);
  for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(cpts.tables[1].probs[3 + k], 1.0 / 3);
}

TEST(FitCpts, MatchesColumnsByName) {
  auto d = rows({{0, 1, 1}, {1, 1, 0}}, {{"B", {"0", "1"}}, {"A", {"0", "1"}}});
  Dag g({"A", "B"}, std::vector<Edge>{{0, 1}});
  auto cpts = fit_cpts(d, g);
  EXPECT_EQ(cpts.variables[0].name, "A");
  // A = 1 twice (B = 0 once, B = 1 once)
  EXPECT_NEAR(cpts.tables[1].probs[2 + 1], 1.25 / 2.5, 1e-15);
}

TEST(SampleCpts, RowsAreDistributionsCenteredOnPosterior) {
  auto gt = triangle();
  auto d = DiscreteData::from_dataset(sample_dataset(gt, 300, 1));
  auto fitted = fit_cpts(d, gt.graph);
  Rng rng = make_rng(5, 0);
  std::vector<double> mean(fitted.tables[2].probs.size(), 0.0);
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) {
    auto s = sample_cpts(fitted, rng);
    s.validate(gt.graph, 1e-9);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += s.tables[2].probs[j] / draws;
  }
  for (std::size_t j = 0; j < mean.size(); ++j) EXPECT_NEAR(mean[j], fitted.tables[2].probs[j], 0.02);
}

TEST(Mutilate, RemovesOnlyIncomingEdges) {
  Dag g({"ADT", "PMR", "S"}, std::vector<Edge>{{0, 1}, {1, 2}, {0, 2}});
  Dag m = mutilate(g, "PMR");
  EXPECT_EQ(m.edges(), (std::vector<Edge>{{0, 2}, {1, 2}}));
  EXPECT_EQ(mutilate(m, 1), m);
  EXPECT_EQ(mutilate(g, 0), g);
}

TEST(Factor, MultiplyMarginalizeDivide) {
  Factor a{{0, 1}, {2, 3}, {1, 2, 3, 4, 5, 6}};
  Factor b{{1, 2}, {3, 2}, {1, 0, 2, 1, 0.5, 3}};
  Factor ab = multiply(a, b);
  EXPECT_EQ(ab.vars, (std::vector<int>{0, 1, 2}));
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 3; ++y) {
      for (int z = 0; z < 2; ++z) {
        EXPECT_DOUBLE_EQ(ab.values[(x * 3 + y) * 2 + z], a.values[x * 3 + y] * b.values[y * 2 + z]);
      }
    }
  }
  std::vector<int> keep = {1};
  Factor m = marginalize(a, keep);
  EXPECT_EQ(m.values, (std::vector<double>{5, 7, 9}));
  Factor zero{{1}, {3}, {0, 7, 9}};
  Factor num{{1}, {3}, {0, 14, 3}};
  Factor q = divide(num, zero);
  EXPECT_EQ(q.values, (std::vector<double>{0, 2, 1.0 / 3}));
  Factor c = a;
  c.reduce(1, 2);
  EXPECT_EQ(c.values, (std::vector<double>{0, 0, 3, 0, 0, 6}));
  EXPECT_DOUBLE_EQ(c.total(), 9);
  Factor z{{0}, {2}, {0, 0}};
  EXPECT_THROW(z.normalize(), Error);
}

TEST(JunctionTree, ChainCliques) {
  auto gt = make_truth({{"A", {"0", "1"}, {{0.5, 0.5}}},
                        {"B", {"0", "1"}, {{0.6, 0.4}, {0.3, 0.7}}},
                        {"C", {"0", "1"}, {{0.9, 0.1}, {0.2, 0.8}}}},
                       {{0, 1}, {1, 2}}, "A", "C");
  JunctionTree jt(gt.graph, gt.cpts);
  auto cliques = jt.cliques();
  std::sort(cliques.begin(), cliques.end());
  EXPECT_EQ(cliques, (std::vector<std::vector<int>>{{0, 1}, {1, 2}}));
  ASSERT_EQ(jt.separators().size(), 1u);
  EXPECT_EQ(jt.separators()[0], std::vector<int>{1});
}

TEST(JunctionTree, SingleNode) {
  auto gt = make_truth({{"A", {"0", "1", "2"}, {{0.2, 0.3, 0.5}}}, {"B", {"0", "1"}, {{0.5, 0.5}}}},
                       {}, "A", "B");
  JunctionTree jt(gt.graph, gt.cpts);
  jt.calibrate();
  auto m = jt.marginal(0);
  EXPECT_NEAR(m[0], 0.2, 1e-15);
  EXPECT_NEAR(m[2], 0.5, 1e-15);
}

TEST(JunctionTree, SeparatorsAgreeAfterCalibration) {
  Rng rng = make_rng(19, 0);
  for (int rep = 0; rep < 20; ++rep) {
    auto gt = testing::random_truth(rng, 7, 3, 0.45);
    JunctionTree jt(gt.graph, gt.cpts);
    Evidence ev = {{6, 1}};
    jt.calibrate(ev);
    for (std::size_t e = 0; e < jt.edges().size(); ++e) {
      const auto [c1, c2] = jt.edges()[e];
      const auto& sep = jt.separators()[e];
      Factor m1 = marginalize(jt.potential(c1), sep);
      Factor m2 = marginalize(jt.potential(c2), sep);
      for (std::size_t i = 0; i < m1.size(); ++i) EXPECT_NEAR(m1.values[i], m2.values[i], 1e-10);
    }
  }
}

TEST(JunctionTree, ChainMarginals) {
  auto gt = chain_ab();
  JunctionTree jt(gt.graph, gt.cpts);
  EXPECT_NEAR(marginal(jt, 1, {})[1], 0.41, 1e-15);
  Evidence a1 = {{0, 1}};
  EXPECT_NEAR(marginal(jt, 1, a1)[1], 0.9, 1e-15);
  auto forced = chain_ab(1.0, 1.0);
  JunctionTree jf(forced.graph, forced.cpts);
  EXPECT_DOUBLE_EQ(marginal(jf, 1, {})[1], 1.0);
  EXPECT_THROW(marginal(jt, 0, a1), Error);
}

TEST(JunctionTree, ImpossibleEvidenceThrows) {
  auto forced = chain_ab(1.0, 1.0);
  JunctionTree jt(forced.graph, forced.cpts);
  Evidence b0 = {{1, 0}};
  EXPECT_THROW(marginal(jt, 0, b0), Error);
}

TEST(JunctionTree, MatchesEnumerationOnRandomNetworks) {
  Rng rng = make_rng(23, 0);
  for (int rep = 0; rep < 25; ++rep) {
    auto gt = testing::random_truth(rng, 6, 3, 0.5);
    const auto joint = enumerate_joint(gt);
    JunctionTree jt(gt.graph, gt.cpts);
    for (int q = 0; q < 6; ++q) {
      const int e = (q + 2) % 6;
      const int level = static_cast<int>(uniform_index(rng, gt.cpts.cardinality(e)));
      Evidence ev = {{e, level}};
      auto got = marginal(jt, q, ev);
      for (int k = 0; k < gt.cpts.cardinality(q); ++k) {
        EXPECT_NEAR(got[k], oracle_marginal(joint, {q, k}, ev), 1e-10);
      }
    }
  }
}

TEST(JunctionTree, ReloadSwapsTables) {
  auto a = chain_ab(0.2, 0.9), b = chain_ab(0.5, 0.1);
  JunctionTree jt(a.graph, a.cpts);
  jt.load(b.cpts);
  EXPECT_NEAR(marginal(jt, 1, {})[1], 0.7 * 0.5 + 0.3 * 0.1, 1e-15);
}

TEST(JunctionTree, StateCap) {
  auto gt = triangle();
  EXPECT_THROW(JunctionTree(gt.graph, gt.cpts, 5.0), Error);
}

TEST(DoMarginal, RootInterventionEqualsConditioning) {
  auto gt = triangle();
  JunctionTree jt(gt.graph, gt.cpts);
  Evidence x2 = {{0, 2}};
  auto seen = marginal(jt, 2, x2);
  auto done = do_marginal(gt.graph, gt.cpts, {0, 2}, 2);
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(done[k], seen[k], 1e-12);
}

TEST(DoMarginal, NonAncestorInterventionChangesNothing) {
  auto gt = triangle();
  JunctionTree jt(gt.graph, gt.cpts);
  auto base = marginal(jt, 0, {});
  auto done = do_marginal(gt.graph, gt.cpts, {2, 1}, 0);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(done[k], base[k], 1e-12);
}

TEST(DoMarginal, ConfounderTriangleMatchesOracle) {
  auto gt = triangle();
  for (int t = 0; t < 2; ++t) {
    double adjusted = 0;
    for (int x = 0; x < 3; ++x) {
      adjusted += gt.cpts.tables[0].probs[x] * gt.cpts.tables[2].probs[(x * 2 + t) * 2 + 1];
    }
    EXPECT_NEAR(do_marginal(gt.graph, gt.cpts, {1, t}, 2)[1], adjusted, 1e-12);
    EXPECT_NEAR(do_marginal(gt.graph, gt.cpts, {1, t}, 2)[1],
                oracle_interventional_risk(gt, std::to_string(t)), 1e-12);
  }
}

TEST(AceDo, TrivialCasesAndOracle) {
  auto gt = triangle();
  auto q = CausalQuery::resolve(gt.cpts.variables, "T", "1", "0", "S");
  EXPECT_NEAR(ace_do(gt.graph, gt.cpts, q), oracle_do_ace(gt, "1", "0"), 1e-12);
  q.control = q.treated;
  EXPECT_DOUBLE_EQ(ace_do(gt.graph, gt.cpts, q), 1.0);
  // S -> nothing: intervening on S cannot move X
  auto back = make_truth({{"X", {"0", "1"}, {{0.4, 0.6}}},
                          {"S", {"0", "1"}, {{0.3, 0.7}, {0.8, 0.2}}}},
                         {{0, 1}}, "S", "X");
  auto q2 = CausalQuery::resolve(back.cpts.variables, "S", "1", "0", "X");
  EXPECT_NEAR(ace_do(back.graph, back.cpts, q2), 1.0, 1e-14);
  EXPECT_THROW(CausalQuery::resolve(gt.cpts.variables, "T", "1", "7", "S"), Error);
}

TEST(AceDo, DefaultTruthMatchesOracle) {
  auto gt = default_ground_truth();
  auto q = CausalQuery::resolve(gt.cpts.variables, "PMR", "Low", "High", "Safety");
  EXPECT_NEAR(ace_do(gt.graph, gt.cpts, q), oracle_do_ace(gt, "Low", "High"), 1e-12);
  AceEvaluator eval(gt.graph, gt.cpts, q);
  auto r = eval.evaluate(gt.cpts);
  EXPECT_NEAR(r.treated, oracle_interventional_risk(gt, "Low"), 1e-12);
  EXPECT_NEAR(r.control, oracle_interventional_risk(gt, "High"), 1e-12);
  EXPECT_NEAR(r.ratio(), oracle_do_ace(gt, "Low", "High"), 1e-12);
}

TEST(PosteriorSamples, SingleDrawIsPositiveAndSeeded) {
  auto gt = triangle();
  auto d = DiscreteData::from_dataset(sample_dataset(gt, 500, 3));
  auto q = CausalQuery::resolve(d.variables, "T", "1", "0", "S");
  auto one = posterior_ace_samples(d, gt.graph, q, 1, 4);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_GT(one[0], 0);
  auto a = posterior_ace_samples(d, gt.graph, q, 100, 4);
  auto b = posterior_ace_samples(d, gt.graph, q, 100, 4);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[0], one[0]);
}

TEST(PosteriorSamples, HugeDataConcentrates) {
  auto gt = triangle();
  auto d = DiscreteData::from_dataset(sample_dataset(gt, 1'000'000, 6));
  auto q = CausalQuery::resolve(d.variables, "T", "1", "0", "S");
  auto s = posterior_ace_samples(d, gt.graph, q, 300, 2);
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
  double ss = 0;
  for (double v : s) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (s.size() - 1));
  const double point = ace_do(gt.graph, fit_cpts(d, gt.graph), q);
  EXPECT_LT(sd, 0.05 * point);
  EXPECT_NEAR(mean, point, 3 * sd);
}

TEST(ModelAverage, SingleNetworkIsItsMean) {
  std::vector<double> scores = {-10};
  std::vector<std::vector<double>> samples = {{1.0, 2.0, 4.0, 3.0}};
  auto avg = model_average_ace(scores, samples);
  EXPECT_DOUBLE_EQ(avg.point, 2.5);
  EXPECT_DOUBLE_EQ(avg.weights[0], 1.0);
}

TEST(ModelAverage, EqualScoresIdenticalSamples) {
  std::vector<double> scores = {-3, -3};
  std::vector<std::vector<double>> samples = {{2.0, 2.0}, {2.0, 2.0}};
  auto avg = model_average_ace(scores, samples);
  EXPECT_DOUBLE_EQ(avg.point, 2.0);
  EXPECT_DOUBLE_EQ(avg.lower, 2.0);
  EXPECT_DOUBLE_EQ(avg.upper, 2.0);
}

TEST(ModelAverage, HundredLogUnitsIsNegligible) {
  std::vector<double> scores = {-1000, -1100};
  std::vector<std::vector<double>> samples = {{2.0}, {9.0}};
  auto avg = model_average_ace(scores, samples);
  EXPECT_LT(avg.weights[1], 1e-40);
  EXPECT_NEAR(avg.weights[1], std::exp(-100.0) / (1 + std::exp(-100.0)), 1e-55);
  EXPECT_DOUBLE_EQ(avg.point, 2.0 * avg.weights[0] + 9.0 * avg.weights[1]);
  auto uniform = model_average_ace(scores, samples, ModelWeighting::kUniform);
  EXPECT_DOUBLE_EQ(uniform.point, 5.5);
}

TEST(ModelAverage, WeightedQuantileIsInverseCdf) {
  std::vector<double> v = {3, 1, 2, 4};
  std::vector<double> w = {1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(weighted_quantile(v, w, 0.5), 2);
  EXPECT_DOUBLE_EQ(weighted_quantile(v, w, 0.51), 3);
  EXPECT_DOUBLE_EQ(weighted_quantile(v, w, 0.0), 1);
  EXPECT_DOUBLE_EQ(weighted_quantile(v, w, 1.0), 4);
  std::vector<double> heavy = {0, 0, 10, 0};
  EXPECT_DOUBLE_EQ(weighted_quantile(v, heavy, 0.9), 2);
}

TEST(CbnConfig, JsonRoundTrip) {
  CbnConfig c;
  c.k = 3;
  c.draws = 77;
  c.weighting = ModelWeighting::kUniform;
  c.forbidden = {{"Safety", "PMR"}};
  auto back = CbnConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_THROW(CbnConfig::from_json(nlohmann::json{{"cooling", 1.5}}), Error);
  EXPECT_THROW(parse_weighting("bogus"), Error);
}

TEST(CbnPipeline, EstimateRecordOnTriangle) {
  auto gt = triangle();
  auto d = DiscreteData::from_dataset(sample_dataset(gt, 20000, 8));
  CbnConfig cfg;
  cfg.k = 3;
  cfg.draws = 300;
  cfg.schedule.steps = 3000;
  auto learned = learn_structure(d, cfg);
  ASSERT_FALSE(learned.networks.empty());
  EXPECT_LE(learned.networks.size(), 3u);
  auto q = CausalQuery::resolve(d.variables, "T", "1", "0", "S");
  auto est = cbn_estimate(d, learned.networks, q, cfg);
  EXPECT_EQ(est.method, Method::kCbn);
  EXPECT_EQ(est.treated, "1");
  EXPECT_EQ(est.n_used, 20000u);
  EXPECT_LE(est.lower, est.upper);
  const double truth = oracle_do_ace(gt, "1", "0");
  EXPECT_NEAR(est.point, truth, 0.1 * truth);
  EXPECT_GT(est.risk_treated, est.risk_control);
}

}  // namespace
}  // namespace causeway
