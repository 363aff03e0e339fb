#ifndef CAUSEWAY_STRUCTURE_LEARNING_H_
#define CAUSEWAY_STRUCTURE_LEARNING_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "causeway/cpt.h"
#include "causeway/dag.h"
#include "causeway/data_model.h"

namespace causeway {

// Integer-coded categorical data, one column per variable.
struct DiscreteData {
  std::vector<DiscreteVariable> variables;
  std::vector<std::vector<int>> columns;

  std::size_t num_rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t num_variables() const { return variables.size(); }
  int cardinality(int v) const { return static_cast<int>(variables[v].levels.size()); }
  int index_of(std::string_view name) const;
  std::vector<std::string> names() const;
  DiscreteData select_rows(std::span<const std::size_t> rows) const;

  // Throws when any variable is continuous.
  static DiscreteData from_dataset(const Dataset& data);
};

// ---------------------------------------------------------------------------
// Conditional independence

struct G2Result {
  double statistic = 0;
  int dof = 0;
  double p_value = 1;
};

// Strata of r x c counts, each row-major. Rows or columns that are empty
// within a stratum do not count towards the degrees of freedom.
G2Result g2_from_counts(std::span<const double> counts, int rows, int cols, std::size_t strata);
// G^2 test of a _||_ b | z.
G2Result g2_test(const DiscreteData& data, int a, int b, std::span<const int> z);

// ---------------------------------------------------------------------------
// PC

struct PcOptions {
  double alpha = 0.01;
  // A test runs only when n >= min_rows_per_cell * (cells in the table);
  // skipped tests keep the edge.
  double min_rows_per_cell = 5.0;
  // -1 for no limit.
  int max_condition_size = -1;
};

struct PcResult {
  Pdag pdag;
  std::size_t tests_run = 0;
  std::size_t tests_skipped = 0;
  // Non-empty when every test was skipped and the complete graph came back.
  std::string warning;
  // Separating set found for each removed pair (a < b).
  std::map<Edge, std::vector<int>> sepsets;
};

PcResult pc_learn(const DiscreteData& data, const PcOptions& opts = {});

// Orients a PDAG into a member of its class without new v-structures or
// cycles. Sinks are peeled off highest index first, so a lone A - B becomes
// A -> B.
Dag pdag_to_dag(const Pdag& pdag);

// ---------------------------------------------------------------------------
// BDeu

inline constexpr std::size_t kMaxParentConfigs = 4096;

// Log BDeu contribution of one node given its parents.
double bdeu_family(const DiscreteData& data, int child, std::span<const int> parents,
                   double ess = 1.0, std::size_t max_configs = kMaxParentConfigs);
double bdeu_score(const DiscreteData& data, const Dag& graph, double ess = 1.0,
                  std::size_t max_configs = kMaxParentConfigs);

// Memoized family scores, safe to share across threads.
class BdeuScorer {
 public:
  BdeuScorer(const DiscreteData& data, double ess = 1.0,
             std::size_t max_configs = kMaxParentConfigs);

  const DiscreteData& data() const { return *data_; }
  double ess() const { return ess_; }
  std::size_t max_configs() const { return max_configs_; }
  // False when the parent set exceeds the configuration cap.
  bool feasible(int child, std::span<const int> parents) const;
  double family(int child, std::span<const int> parents);
  double score(const Dag& graph);

 private:
  const DiscreteData* data_;
  double ess_;
  std::size_t max_configs_;
  std::mutex mutex_;
  std::map<std::pair<int, std::vector<int>>, double> cache_;
};

// ---------------------------------------------------------------------------
// Simulated annealing

struct ScoredNetwork {
  Dag dag;
  double score = 0;

  nlohmann::json to_json() const;
  static ScoredNetwork from_json(const nlohmann::json& doc);
};

struct AnnealingSchedule {
  double t0 = 1.0;
  double cooling = 0.999;
  std::size_t steps = 50'000;

  void validate() const;
};

// Background knowledge, by node index.
struct Knowledge {
  std::vector<Edge> forbidden;
  std::vector<Edge> required;

  bool empty() const { return forbidden.empty() && required.empty(); }
  bool is_forbidden(int from, int to) const;
  bool is_required(int from, int to) const;
};

// The k best distinct DAGs (by edge set) visited by a Metropolis chain over
// add / delete / reverse moves started at `init`; best first. The best score
// seen after each step goes to `best_trace` when given.
std::vector<ScoredNetwork> sa_search(BdeuScorer& scorer, const Dag& init, std::size_t k,
                                     const AnnealingSchedule& schedule, std::uint64_t seed,
                                     const Knowledge& knowledge = {},
                                     std::vector<double>* best_trace = nullptr);
std::vector<ScoredNetwork> sa_search(const DiscreteData& data, const Dag& init, std::size_t k,
                                     const AnnealingSchedule& schedule, std::uint64_t seed,
                                     double ess = 1.0);

// Union of several k-best lists, deduplicated and cut to k.
std::vector<ScoredNetwork> merge_top_k(std::span<const std::vector<ScoredNetwork>> lists,
                                       std::size_t k);

}  // namespace causeway

#endif  // CAUSEWAY_STRUCTURE_LEARNING_H_
