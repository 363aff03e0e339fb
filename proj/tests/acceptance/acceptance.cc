// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "causeway/cbn_inference.h"
#include "causeway/dag.h"
#include "causeway/potential_outcomes.h"
#include "causeway/structure_learning.h"
#include "causeway/study.h"
#include "causeway/synth_oracle.h"
#include "test_support.h"

namespace fs = std::filesystem;
using namespace causeway;
using causeway::testing::random_truth;
using causeway::testing::TempDir;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const std::vector<std::string> kCovariates = {"Urban", "ADT", "Age"};

// ---------------------------------------------------------------------------

Outcome exact_inference() {
  const auto t0 = Clock::now();
  Rng rng = make_rng(1001, 0);
  double worst = 0;
  int queries = 0;
  for (int net = 0; net < 100; ++net) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 7));
    const GroundTruth gt = random_truth(rng, n, 2, 0.5);
    const JointTable joint = enumerate_joint(gt);
    JunctionTree jt(gt.graph, gt.cpts);
    for (int q = 0; q < 20; ++q) {
      const int query = static_cast<int>(uniform_index(rng, n));
      Evidence ev;
      for (int v = 0; v < n; ++v) {
        if (v != query && uniform01(rng) < 0.3) {
          ev.push_back({v, static_cast<int>(uniform_index(rng, 2))});
        }
      }
      const auto got = marginal(jt, query, ev);
      for (int k = 0; k < 2; ++k) {
        worst = std::max(worst, std::abs(got[k] - oracle_marginal(joint, {query, k}, ev)));
      }
      ++queries;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && secs < 30,
          std::to_string(queries) + " queries, max |jt - enumeration| = " + fmt("%.3g", worst) +
              " (tol 1e-10), " + fmt("%.2f", secs) + " s (limit 30 s)"};
}

// ---------------------------------------------------------------------------

std::set<std::tuple<int, int, int>> v_structures(const Dag& g) {
  std::set<std::tuple<int, int, int>> out;
  for (int c = 0; c < static_cast<int>(g.num_nodes()); ++c) {
    const auto& ps = g.parents(c);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      for (std::size_t j = i + 1; j < ps.size(); ++j) {
        if (!g.adjacent(ps[i], ps[j])) out.insert({ps[i], c, ps[j]});
      }
    }
  }
  return out;
}

std::vector<Dag> all_dags(const std::vector<std::string>& names) {
  const int n = static_cast<int>(names.size());
  std::vector<Edge> pairs;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) pairs.push_back({a, b});
  }
  std::vector<Dag> out;
  int total = 1;
  for (std::size_t i = 0; i < pairs.size(); ++i) total *= 3;
  for (int code = 0; code < total; ++code) {
    Dag g(names);
    bool ok = true;
    int c = code;
    for (auto [a, b] : pairs) {
      const int s = c % 3;
      c /= 3;
      if (s == 0) continue;
      const int from = s == 1 ? a : b, to = s == 1 ? b : a;
      if (!g.can_add_edge(from, to)) {
        ok = false;
        break;
      }
      g.add_edge(from, to);
    }
    if (ok) out.push_back(std::move(g));
  }
  return out;
}

Outcome bdeu_equivalence() {
  const auto t0 = Clock::now();
  Rng rng = make_rng(1002, 0);
  const std::vector<std::string> names = {"X0", "X1", "X2"};
  const auto dags = all_dags(names);
  int pairs = 0;
  double worst = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const GroundTruth gt = random_truth(rng, 3, 2, 0.6);
    const auto data = DiscreteData::from_dataset(sample_dataset(gt, 1000, rng()));
    std::vector<double> scores;
    for (const auto& g : dags) scores.push_back(bdeu_score(data, g));
    for (std::size_t i = 0; i < dags.size(); ++i) {
      for (std::size_t j = i + 1; j < dags.size(); ++j) {
        const bool equivalent = Pdag::from_dag(dags[i]).skeleton() ==
                                    Pdag::from_dag(dags[j]).skeleton() &&
                                v_structures(dags[i]) == v_structures(dags[j]);
        if (!equivalent) continue;
        worst = std::max(worst, std::abs(scores[i] - scores[j]));
        ++pairs;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 5 && pairs > 0,
          std::to_string(dags.size()) + " DAGs, " + std::to_string(pairs) +
              " equivalent pairs over 10 datasets, max score gap " + fmt("%.3g", worst) +
              " (tol 1e-9), " + fmt("%.2f", secs) + " s (limit 5 s)"};
}

// ---------------------------------------------------------------------------

Outcome dsep_soundness() {
  Rng rng = make_rng(1003, 0);
  long statements = 0, violations = 0;
  double worst = 0;
  for (int net = 0; net < 50; ++net) {
    const int n = 3 + static_cast<int>(uniform_index(rng, 3));
    const GroundTruth gt = random_truth(rng, n, 3, 0.5);
    const JointTable joint = enumerate_joint(gt);
    const auto& cards = joint.cards;
    std::vector<int> codes(n);
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
          if (mask & ((1u << a) | (1u << b))) continue;
          std::vector<int> z;
          for (int v = 0; v < n; ++v) {
            if (mask & (1u << v)) z.push_back(v);
          }
          if (!d_separated(gt.graph, a, b, z)) continue;
          ++statements;
          // P(a, b, z) P(z) = P(a, z) P(b, z) in every cell.
          int zcells = 1;
          for (int v : z) zcells *= cards[v];
          std::vector<double> pabz(static_cast<std::size_t>(zcells) * cards[a] * cards[b], 0.0);
          for (std::size_t s = 0; s < joint.num_states(); ++s) {
            joint.decode(s, codes);
            int zi = 0;
            for (int v : z) zi = zi * cards[v] + codes[v];
            pabz[(static_cast<std::size_t>(zi) * cards[a] + codes[a]) * cards[b] + codes[b]] +=
                joint.probs[s];
          }
          bool bad = false;
          for (int zi = 0; zi < zcells; ++zi) {
            double pz = 0;
            std::vector<double> pa(cards[a], 0.0), pb(cards[b], 0.0);
            for (int i = 0; i < cards[a]; ++i) {
              for (int j = 0; j < cards[b]; ++j) {
                const double p = pabz[(static_cast<std::size_t>(zi) * cards[a] + i) * cards[b] + j];
                pz += p;
                pa[i] += p;
                pb[j] += p;
              }
            }
            if (pz <= 0) continue;
            for (int i = 0; i < cards[a]; ++i) {
              for (int j = 0; j < cards[b]; ++j) {
                const double p = pabz[(static_cast<std::size_t>(zi) * cards[a] + i) * cards[b] + j];
                const double gap = std::abs(p / pz - (pa[i] / pz) * (pb[j] / pz));
                worst = std::max(worst, gap);
                bad |= gap > 1e-10;
              }
            }
          }
          violations += bad;
        }
      }
    }
  }
  return {violations == 0 && statements > 0,
          std::to_string(statements) + " d-separation statements, " +
              std::to_string(violations) + " violations, max |P(ab|z) - P(a|z)P(b|z)| = " +
              fmt("%.3g", worst) + " (tol 1e-10)"};
}

// ---------------------------------------------------------------------------

Outcome structure_recovery() {
  const auto t0 = Clock::now();
  const GroundTruth gt = default_ground_truth();
  const auto true_skeleton = Pdag::from_dag(gt.graph).skeleton();
  int pc_ok = 0, sa_ok = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    const auto data = DiscreteData::from_dataset(sample_dataset(gt, 50000, 4000 + seed));
    // The real pipeline: PC, its extension as the annealing start, default schedule.
    CbnConfig cfg;
    cfg.pc = {0.01, 5.0, -1};
    cfg.k = 1;
    cfg.seed = seed;
    const LearnedStructure learned = learn_structure(data, cfg);
    pc_ok += learned.pc.pdag.skeleton() == true_skeleton;
    BdeuScorer scorer(data, cfg.ess);
    sa_ok += learned.networks.front().score >= scorer.score(gt.graph) - 1e-9;
  }
  const double secs = seconds_since(t0);
  return {pc_ok >= 18 && sa_ok >= 18 && secs < 120,
          "PC exact skeleton " + std::to_string(pc_ok) + "/20, annealing best >= true DAG score " +
              std::to_string(sa_ok) + "/20 (need 18 each), " + fmt("%.1f", secs) +
              " s (limit 120 s)"};
}

// ---------------------------------------------------------------------------

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_file(p)); }

// Simulates `n` rows into dir/sim and writes a study config next to it.
fs::path prepare_study(const fs::path& dir, std::size_t n, std::uint64_t seed,
                       const std::vector<std::string>& methods,
                       const std::vector<std::pair<std::string, std::string>>& comparisons,
                       int bootstrap) {
  const fs::path truth = fs::path(CAUSEWAY_DATA_DIR) / "default_truth.json";
  std::ostringstream log;
  if (cmd_simulate(truth, n, seed, dir / "sim", log) != kExitOk) {
    throw std::runtime_error("simulate failed: " + log.str());
  }
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& [t, c] : comparisons) comps.push_back(nlohmann::json::array({t, c}));
  nlohmann::json cfg = {
      {"data", "sim/data.csv"},
      {"schema", "sim/schema.json"},
      {"comparisons", comps},
      {"methods", methods},
      {"seed", seed},
      {"output", "out"},
      {"boosting", {{"max_trees", 1000}, {"shrinkage", 0.05}, {"interaction_depth", 2}, {"min_node", 10}}},
      {"bootstrap", bootstrap},
      {"balance_permutations", 200},
      {"structure", {{"steps", 20000}, {"k", 10}}},
      {"draws", 1000}};
  write_file(dir / "study.json", cfg.dump(2));
  return dir / "study.json";
}

Outcome effect_recovery() {
  const auto t0 = Clock::now();
  const GroundTruth gt = default_ground_truth();
  const double r = oracle_do_ace(gt, "Low", "High");
  TempDir dir("accept5");
  const auto cfg = prepare_study(dir.path(), 20000, 5,
                                 {"ipw_combined", "ipw_individual", "cbn"}, {{"Low", "High"}}, 20);
  std::ostringstream log;
  const int code = cmd_estimate(cfg, log);
  if (code != kExitOk) return {false, "estimate exited " + std::to_string(code) + ": " + log.str()};
  const auto bundle = read_json(dir.path() / "out" / "bundle.json");
  const auto& comp = bundle["comparisons"][0];
  bool ok = r >= 2.5 && r <= 3.5;
  std::string detail = "R = " + fmt("%.4f", r);
  for (const auto& e : comp["estimates"]) {
    const double point = e["point"].get<double>();
    const double rel = std::abs(point - r) / r;
    ok &= rel <= 0.10;
    detail += ", " + e["method"].get<std::string>() + " " + fmt("%.4f", point) + " (" +
              fmt("%+.1f%%", 100 * (point - r) / r) + ")";
  }
  ok &= comp["estimates"].size() == 3;
  const double naive = comp["naive_risk_ratio"].get<double>();
  const double naive_rel = std::abs(naive - r) / r;
  ok &= naive_rel > 0.20;
  const double secs = seconds_since(t0);
  ok &= secs < 300;
  detail += ", naive " + fmt("%.4f", naive) + " (" + fmt("%+.1f%%", 100 * (naive - r) / r) +
            "); band +-10%, naive must exceed 20%; " + fmt("%.1f", secs) + " s (limit 300 s)";
  return {ok, detail};
}

// ---------------------------------------------------------------------------

Outcome balance_improvement() {
  BoostConfig cfg;
  cfg.max_trees = 1000;
  cfg.shrinkage = 0.05;
  cfg.min_node = 10;
  auto max_of = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };

  const auto conf = sample_dataset(default_ground_truth(), 20000, 6);
  const auto cpair = split_treatment_pair(conf, "Low", "High");
  const auto cfit = fit_propensity(cpair, kCovariates, cfg);
  const double before = max_of(cfit.balance_before), after = max_of(cfit.balance_after);

  const auto rnd = sample_dataset(randomized_ground_truth(), 20000, 6);
  const auto rpair = split_treatment_pair(rnd, "Low", "High");
  const auto rfit = fit_propensity(rpair, kCovariates, cfg);
  const double rb = max_of(rfit.balance_before), ra = max_of(rfit.balance_after);

  const bool ok = after < 0.5 * before && std::abs(ra - rb) < 0.02;
  return {ok, "confounded max KS " + fmt("%.4f", before) + " -> " + fmt("%.4f", after) +
                  " (need < 50%), randomized " + fmt("%.4f", rb) + " -> " + fmt("%.4f", ra) +
                  " (need |diff| < 0.02)"};
}

// ---------------------------------------------------------------------------

Outcome bootstrap_coverage() {
  const auto t0 = Clock::now();
  const GroundTruth gt = default_ground_truth();
  const double r = oracle_do_ace(gt, "Low", "High");
  PoConfig cfg;
  cfg.propensity.max_trees = cfg.outcome.max_trees = 1000;
  cfg.propensity.shrinkage = cfg.outcome.shrinkage = 0.05;
  cfg.propensity.min_node = cfg.outcome.min_node = 10;
  cfg.bootstrap = 200;
  int covered = 0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    const auto data = sample_dataset(gt, 5000, 70000 + rep);
    const auto pair = split_treatment_pair(data, "Low", "High");
    cfg.seed = substream_seed(7, rep);
    const auto fit = fit_propensity(pair, kCovariates, cfg.propensity);
    const auto est = estimate_po_method(pair, kCovariates, Method::kIpwCombined, cfg, fit);
    covered += est.lower <= r && r <= est.upper;
  }
  const double rate = static_cast<double>(covered) / reps;
  const double secs = seconds_since(t0);
  return {rate >= 0.88 && rate <= 0.99 && secs < 900,
          std::to_string(covered) + "/" + std::to_string(reps) + " intervals cover R = " +
              fmt("%.4f", r) + " (" + fmt("%.1f%%", 100 * rate) + ", need 88-99%), B = 200, " +
              fmt("%.1f", secs) + " s (limit 900 s)"};
}

// ---------------------------------------------------------------------------

AceEstimate cbn_run(const GroundTruth& gt, std::size_t n, std::uint64_t seed) {
  const auto data = DiscreteData::from_dataset(sample_dataset(gt, n, seed));
  CbnConfig cfg;
  cfg.schedule.steps = 20000;
  cfg.k = 10;
  cfg.draws = 1000;
  cfg.seed = seed;
  const auto learned = learn_structure(data, cfg);
  const auto q = CausalQuery::resolve(data.variables, "PMR", "Low", "High", "Safety");
  return cbn_estimate(data, learned.networks, q, cfg);
}

Outcome credible_intervals() {
  const GroundTruth gt = default_ground_truth();
  const double r = oracle_do_ace(gt, "Low", "High");
  int covered = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    const auto e = cbn_run(gt, 20000, 8000 + seed);
    covered += e.lower <= r && r <= e.upper;
  }
  std::vector<double> widths;
  for (std::size_t n : {2000, 20000, 200000}) {
    const auto e = cbn_run(gt, n, 8100);
    widths.push_back(e.upper - e.lower);
  }
  const bool shrinks = widths[0] > widths[1] && widths[1] > widths[2];
  return {covered >= 18 && shrinks,
          "covers R in " + std::to_string(covered) + "/20 seeds (need 18), width " +
              fmt("%.4f", widths[0]) + " > " + fmt("%.4f", widths[1]) + " > " +
              fmt("%.4f", widths[2]) + " for n = 2k/20k/200k"};
}

// ---------------------------------------------------------------------------

Outcome matching_discards() {
  // Treatment is rare (about 12%) and strongly driven by X.
  const GroundTruth gt = causeway::testing::make_truth(
      {{"X", {"0", "1", "2"}, {{0.5, 0.3, 0.2}}},
       {"T", {"c", "t"}, {{0.98, 0.02}, {0.9, 0.1}, {0.6, 0.4}}},
       {"S", {"0", "1"}, {{0.9, 0.1}, {0.8, 0.2}, {0.8, 0.2}, {0.6, 0.4}, {0.6, 0.4}, {0.4, 0.6}}}},
      {{0, 1}, {0, 2}, {1, 2}}, "T", "S");
  const auto pair = split_treatment_pair(sample_dataset(gt, 5000, 9), "t", "c");
  PoConfig cfg;
  cfg.propensity.max_trees = cfg.outcome.max_trees = 500;
  cfg.propensity.shrinkage = cfg.outcome.shrinkage = 0.05;
  cfg.bootstrap = 20;
  const std::vector<std::string> covs = {"X"};
  const auto fit = fit_propensity(pair, covs, cfg.propensity);
  const auto est = estimate_po_method(pair, covs, Method::kMatchCombined, cfg, fit);
  if (!est.discard_fraction) return {false, "matching estimate carries no discard fraction"};
  const double f = *est.discard_fraction;
  return {f > 0.5, "arms " + std::to_string(pair.num_treated()) + " treated / " +
                       std::to_string(pair.num_control()) + " control, discard fraction " +
                       fmt("%.3f", f) + " (need > 0.5)"};
}

// ---------------------------------------------------------------------------

Outcome determinism() {
  TempDir a("accept10a"), b("accept10b");
  const std::vector<std::string> methods = {"ipw_combined", "ipw_individual", "match_combined",
                                            "match_individual", "cbn"};
  const std::vector<std::pair<std::string, std::string>> comps = {{"Low", "High"}, {"Med", "Low"}};
  const auto ca = prepare_study(a.path(), 5000, 10, methods, comps, 20);
  const auto cb = prepare_study(b.path(), 5000, 10, methods, comps, 20);
  std::ostringstream log;
  const int code_a = cmd_estimate(ca, log);
  const int code_b = cmd_estimate(cb, log);
  if (code_a != kExitOk || code_b != kExitOk) return {false, "estimate failed: " + log.str()};
  int files = 0, differ = 0;
  for (const auto& entry : fs::directory_iterator(a.path() / "out")) {
    const auto name = entry.path().filename();
    const auto ext = name.extension();
    if (ext != ".json" && ext != ".svg") continue;
    ++files;
    const fs::path other = b.path() / "out" / name;
    if (!fs::exists(other) || read_file(entry.path()) != read_file(other)) ++differ;
  }
  return {differ == 0 && files >= 4,
          std::to_string(files) + " bundle/SVG files compared, " + std::to_string(differ) +
              " differ"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "exact inference matches enumeration", exact_inference},
      {2, "BDeu score equivalence", bdeu_equivalence},
      {3, "d-separation soundness", dsep_soundness},
      {4, "structure recovery", structure_recovery},
      {5, "end-to-end effect recovery", effect_recovery},
      {6, "balance improvement", balance_improvement},
      {7, "bootstrap coverage", bootstrap_coverage},
      {8, "credible-interval sanity", credible_intervals},
      {9, "matching discard fraction", matching_discards},
      {10, "determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %2d: %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
