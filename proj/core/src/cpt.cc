#include "causeway/cpt.h"

#include <cmath>

#include "causeway/error.h"

namespace causeway {

std::size_t Cpt::num_configs() const {
  std::size_t q = 1;
  for (int c : parent_cards) q *= static_cast<std::size_t>(c);
  return q;
}

std::size_t Cpt::config_index(std::span<const int> parent_codes) const {
  std::size_t j = 0;
  for (std::size_t i = 0; i < parent_cards.size(); ++i) {
    j = j * parent_cards[i] + static_cast<std::size_t>(parent_codes[i]);
  }
  return j;
}

std::size_t Cpt::config_of(std::span<const int> assignment) const {
  std::size_t j = 0;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    j = j * parent_cards[i] + static_cast<std::size_t>(assignment[parents[i]]);
  }
  return j;
}

int CptSet::level_index(int node, std::string_view label) const {
  const auto& levels = variables[node].levels;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (levels[k] == label) return static_cast<int>(k);
  }
  throw Error("'" + std::string(label) + "' is not a level of '" + variables[node].name + "'");
}

void CptSet::validate(const Dag& graph, double tolerance) const {
  if (tables.size() != graph.num_nodes() || variables.size() != graph.num_nodes()) {
    throw Error("cpt set: table count differs from node count");
  }
  for (std::size_t v = 0; v < tables.size(); ++v) {
    const Cpt& t = tables[v];
    const std::string& name = graph.name(static_cast<int>(v));
    if (variables[v].name != name) throw Error("cpt set: variable order differs from graph");
    if (t.cardinality < 1 || static_cast<std::size_t>(t.cardinality) != variables[v].levels.size()) {
      throw Error("cpt for '" + name + "': cardinality differs from its level list");
    }
    if (t.parents != graph.parents(static_cast<int>(v))) {
      throw Error("cpt for '" + name + "': parent set differs from the graph");
    }
    for (std::size_t i = 0; i < t.parents.size(); ++i) {
      if (t.parent_cards[i] != tables[t.parents[i]].cardinality) {
        throw Error("cpt for '" + name + "': parent cardinality mismatch");
      }
    }
    if (t.probs.size() != t.num_configs() * t.cardinality) {
      throw Error("cpt for '" + name + "': wrong number of entries");
    }
    if (!t.posterior.empty() && t.posterior.size() != t.probs.size()) {
      throw Error("cpt for '" + name + "': posterior parameters have the wrong shape");
    }
    for (std::size_t j = 0; j < t.num_configs(); ++j) {
      double sum = 0;
      for (double p : t.row(j)) {
        if (!(p >= 0) || !std::isfinite(p)) {
          throw Error("cpt for '" + name + "': negative or non-finite probability");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > tolerance) {
        throw Error("cpt for '" + name + "': row " + std::to_string(j) + " sums to " +
                    std::to_string(sum));
      }
    }
  }
}

}  // namespace causeway
