#ifndef CAUSEWAY_CPT_H_
#define CAUSEWAY_CPT_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "causeway/dag.h"

namespace causeway {

// Conditional probability table P(node = k | parents = j). Rows are parent
// configurations in mixed radix with the LAST parent varying fastest; parents
// are listed in ascending node order, matching Dag::parents().
struct Cpt {
  std::vector<int> parents;
  std::vector<int> parent_cards;
  int cardinality = 0;
  // num_configs() x cardinality, row-major.
  std::vector<double> probs;
  // Posterior Dirichlet parameters (prior + counts), same layout as probs.
  // Empty for hand-specified tables.
  std::vector<double> posterior;

  std::size_t num_configs() const;
  std::span<const double> row(std::size_t config) const {
    return {probs.data() + config * cardinality, static_cast<std::size_t>(cardinality)};
  }
  std::span<const double> posterior_row(std::size_t config) const {
    return {posterior.data() + config * cardinality, static_cast<std::size_t>(cardinality)};
  }
  // Row index of a parent assignment given as codes aligned with `parents`.
  std::size_t config_index(std::span<const int> parent_codes) const;
  // Row index read directly from a full assignment indexed by node.
  std::size_t config_of(std::span<const int> assignment) const;
  double prob(std::span<const int> assignment, int node) const {
    return probs[config_of(assignment) * cardinality + assignment[node]];
  }
};

// Level labels of one discrete variable.
struct DiscreteVariable {
  std::string name;
  std::vector<std::string> levels;
};

// One table per node of a Dag, plus level labels.
struct CptSet {
  std::vector<DiscreteVariable> variables;
  std::vector<Cpt> tables;

  std::size_t size() const { return tables.size(); }
  int cardinality(int node) const { return tables[node].cardinality; }
  int level_index(int node, std::string_view label) const;

  // Throws unless the tables match `graph` exactly and every row is a
  // probability vector within `tolerance`.
  void validate(const Dag& graph, double tolerance = 1e-12) const;
};

}  // namespace causeway

#endif  // CAUSEWAY_CPT_H_
