#ifndef CAUSEWAY_SYNTH_ORACLE_H_
#define CAUSEWAY_SYNTH_ORACLE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "causeway/cpt.h"
#include "causeway/dag.h"
#include "causeway/data_model.h"

namespace causeway {

// A fully specified discrete generating network with known treatment and
// outcome nodes. The outcome must be binary with a level labelled "1" for the
// risk-ratio oracles.
struct GroundTruth {
  Dag graph;
  CptSet cpts;
  std::string treatment;
  std::string outcome;
  std::uint64_t seed = 0;

  void validate() const;
  // All variables categorical; roles from `treatment` / `outcome`.
  Schema schema() const;

  // {"nodes": [{"name", "levels", "parents", "cpt": [[...], ...]}, ...],
  //  "treatment", "outcome", "seed"}; CPT rows follow Cpt's layout.
  nlohmann::json to_json() const;
  static GroundTruth from_json(const nlohmann::json& doc);
  static GroundTruth load(const std::filesystem::path& path);
};

// Dense joint distribution over the Cartesian product of all levels, indexed
// in mixed radix with the last variable varying fastest.
struct JointTable {
  std::vector<DiscreteVariable> variables;
  std::vector<int> cards;
  std::vector<double> probs;

  std::size_t num_states() const { return probs.size(); }
  int index_of(std::string_view name) const;
  // Decodes a state index into one code per variable.
  void decode(std::size_t state, std::span<int> codes) const;
};

inline constexpr std::size_t kMaxEnumerationStates = 10'000'000;

// n i.i.d. rows by ancestral sampling; deterministic in (gt, n, seed).
Dataset sample_dataset(const GroundTruth& gt, std::size_t n, std::uint64_t seed);
inline Dataset sample_dataset(const GroundTruth& gt, std::size_t n) {
  return sample_dataset(gt, n, gt.seed);
}

// P(v) = prod_i P(v_i | pa_i) over every configuration.
JointTable enumerate_joint(const Dag& graph, const CptSet& cpts);
inline JointTable enumerate_joint(const GroundTruth& gt) {
  return enumerate_joint(gt.graph, gt.cpts);
}

// (variable index, level code)
using CodeAssignment = std::pair<int, int>;

// P(query | evidence) by summation over the joint table.
double oracle_marginal(const JointTable& joint, CodeAssignment query,
                       std::span<const CodeAssignment> evidence);
// Name/label form: evidence given as (variable, level) pairs.
double oracle_marginal(const JointTable& joint, std::string_view variable,
                       std::string_view level,
                       std::span<const std::pair<std::string, std::string>> evidence = {});

// P(outcome = "1" | do(treatment = level)) by enumerating the truncated
// factorization, i.e. the graph with edges into the treatment deleted.
double oracle_interventional_risk(const GroundTruth& gt, std::string_view treatment_level);
// Ratio of the two interventional risks.
double oracle_do_ace(const GroundTruth& gt, std::string_view treated, std::string_view control);

// The checked-in road-segment analogue used by the acceptance suite:
// Urban -> ADT, ADT -> PMR <- Age, {PMR, ADT, Urban} -> Safety.
GroundTruth default_ground_truth();
// Same network with PMR assigned independently of every covariate.
GroundTruth randomized_ground_truth();

}  // namespace causeway

#endif  // CAUSEWAY_SYNTH_ORACLE_H_
