#ifndef CAUSEWAY_CBN_INFERENCE_H_
#define CAUSEWAY_CBN_INFERENCE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "causeway/ace.h"
#include "causeway/cpt.h"
#include "causeway/dag.h"
#include "causeway/factor.h"
#include "causeway/rng.h"
#include "causeway/structure_learning.h"
#include "causeway/synth_oracle.h"

namespace causeway {

// Posterior-mean CPTs under a BDeu prior with equivalent sample size `ess`:
// P(k | j) = (N_ijk + ess / (r q)) / (N_ij + ess / q). Graph nodes are matched
// to data columns by name; the Dirichlet parameters are kept in `posterior`.
CptSet fit_cpts(const DiscreteData& data, const Dag& graph, double ess = 1.0);

// One CPT set drawn from the Dirichlet posteriors of `fitted`.
CptSet sample_cpts(const CptSet& fitted, Rng& rng);

// `graph` without the edges into `target`.
Dag mutilate(const Dag& graph, int target);
Dag mutilate(const Dag& graph, std::string_view target);

inline constexpr double kMaxCliqueStates = 1e7;

using Evidence = std::vector<CodeAssignment>;

// Hugin junction tree over a triangulated moral graph. The structure depends
// only on the graph and cardinalities, so `load` may swap in new tables.
class JunctionTree {
 public:
  JunctionTree(const Dag& graph, const CptSet& cpts, double max_states = kMaxCliqueStates);

  const std::vector<std::vector<int>>& cliques() const { return cliques_; }
  // Tree edges as (clique, clique) pairs, with the separator of each.
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::vector<int>>& separators() const { return separators_; }

  void load(const CptSet& cpts);
  // Two-pass message passing with the evidence entered.
  void calibrate(std::span<const CodeAssignment> evidence = {});
  bool calibrated() const { return calibrated_; }
  const Factor& potential(std::size_t clique) const { return potentials_[clique]; }

  // Posterior distribution of `query` given the calibrated evidence; throws
  // when the evidence has probability zero.
  std::vector<double> marginal(int query) const;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<int> cards_;
  std::vector<std::vector<int>> cliques_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> separators_;
  std::vector<int> family_clique_;
  // Clique visit order from the root, with the tree edge to each parent.
  std::vector<int> order_;
  std::vector<int> parent_edge_;
  std::vector<Factor> base_;
  std::vector<Factor> potentials_;
  bool calibrated_ = false;
};

// P(query | evidence); query must not be an evidence variable.
std::vector<double> marginal(JunctionTree& jt, int query, std::span<const CodeAssignment> evidence);

// P(query | do(node = level)) on the mutilated graph with a point-mass table
// at `level`.
std::vector<double> do_marginal(const Dag& graph, const CptSet& cpts, CodeAssignment intervention,
                                int query);

// Identifies one risk-ratio contrast inside a network.
struct CausalQuery {
  int treatment = 0;
  int treated = 0;
  int control = 0;
  int outcome = 0;
  int outcome_level = 0;

  // Resolves names and labels; the outcome level is "1".
  static CausalQuery resolve(const std::vector<DiscreteVariable>& variables,
                             std::string_view treatment, std::string_view treated,
                             std::string_view control, std::string_view outcome);
};

// P(outcome = 1 | do(treated)) / P(outcome = 1 | do(control)).
double ace_do(const Dag& graph, const CptSet& cpts, const CausalQuery& q);

struct InterventionalRisks {
  double treated = 0;
  double control = 0;
  double ratio() const;
};

// Reusable evaluator for one graph and contrast.
class AceEvaluator {
 public:
  AceEvaluator(const Dag& graph, const CptSet& cpts, const CausalQuery& q);
  InterventionalRisks evaluate(const CptSet& cpts);

 private:
  Dag mutilated_;
  CausalQuery q_;
  CptSet work_;
  JunctionTree jt_;
};

// `draws` ACE values, each from one Dirichlet draw of every CPT row.
std::vector<double> posterior_ace_samples(const DiscreteData& data, const Dag& graph,
                                          const CausalQuery& q, std::size_t draws,
                                          std::uint64_t seed, double ess = 1.0);

enum class ModelWeighting { kScorePosterior, kUniform };

std::string_view to_string(ModelWeighting weighting);
ModelWeighting parse_weighting(std::string_view text);

struct AveragedAce {
  std::vector<std::vector<double>> samples;
  std::vector<double> weights;
  double point = 1;
  double lower = 1;
  double upper = 1;
};

// Smallest value whose cumulative weight reaches `prob` of the total.
double weighted_quantile(std::span<const double> values, std::span<const double> weights,
                         double prob);

// Pools per-network samples with weights proportional to exp(score - max)
// (or uniform); point is the weighted mean, the interval the equal-tailed
// weighted quantiles at `level`.
AveragedAce model_average_ace(std::span<const double> scores,
                              std::span<const std::vector<double>> samples,
                              ModelWeighting weighting = ModelWeighting::kScorePosterior,
                              double level = 0.95);

// ---------------------------------------------------------------------------
// Network pipeline

struct CbnConfig {
  PcOptions pc;
  AnnealingSchedule schedule;
  std::size_t k = 10;
  double ess = 1.0;
  std::size_t draws = 2000;
  ModelWeighting weighting = ModelWeighting::kScorePosterior;
  double level = 0.95;
  std::uint64_t seed = 1;
  // By name; resolved against the data.
  std::vector<std::pair<std::string, std::string>> forbidden;
  std::vector<std::pair<std::string, std::string>> required;

  nlohmann::json to_json() const;
  static CbnConfig from_json(const nlohmann::json& doc);
};

struct LearnedStructure {
  PcResult pc;
  Dag init;
  std::vector<ScoredNetwork> networks;
};

// PC, a consistent extension of its output, then annealing from there.
LearnedStructure learn_structure(const DiscreteData& data, const CbnConfig& cfg);

// Model-averaged posterior ACE over `networks` as a method = cbn record.
AceEstimate cbn_estimate(const DiscreteData& data, std::span<const ScoredNetwork> networks,
                         const CausalQuery& q, const CbnConfig& cfg);

}  // namespace causeway

#endif  // CAUSEWAY_CBN_INFERENCE_H_
