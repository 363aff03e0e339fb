#ifndef CAUSEWAY_DAG_H_
#define CAUSEWAY_DAG_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace causeway {

using Edge = std::pair<int, int>;  // parent -> child

// Directed acyclic graph over named nodes. Every mutation keeps the graph
// acyclic, loop-free and free of duplicate edges; a mutation that would break
// that throws and leaves the graph unchanged.
class Dag {
 public:
  Dag() = default;
  explicit Dag(std::vector<std::string> nodes);
  Dag(std::vector<std::string> nodes, std::span<const Edge> edges);

  std::size_t num_nodes() const { return nodes_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::string& name(int node) const { return nodes_[node]; }
  int index_of(std::string_view name) const;

  const std::vector<int>& parents(int node) const { return parents_[node]; }
  const std::vector<int>& children(int node) const { return children_[node]; }
  bool has_edge(int from, int to) const;
  bool adjacent(int a, int b) const { return has_edge(a, b) || has_edge(b, a); }
  std::size_t num_edges() const;
  // Edges sorted by (parent, child).
  std::vector<Edge> edges() const;

  // True when from -> to can be added without a loop, duplicate or cycle.
  bool can_add_edge(int from, int to) const;
  void add_edge(int from, int to);
  void remove_edge(int from, int to);
  // Directed path from -> ... -> to of length >= 1.
  bool has_path(int from, int to) const;

  // Kahn order; ties resolved by lowest node index.
  std::vector<int> topological_order() const;
  // All nodes reachable from `node` along directed edges, excluding itself.
  std::vector<int> descendants(int node) const;

  friend bool operator==(const Dag& a, const Dag& b) {
    return a.nodes_ == b.nodes_ && a.parents_ == b.parents_;
  }

  nlohmann::json to_json() const;
  static Dag from_json(const nlohmann::json& doc);
  // Graphviz rendering.
  std::string to_dot(std::string_view graph_name = "G") const;

 private:
  void check_node(int node) const;

  std::vector<std::string> nodes_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
};

// Partially directed graph: the Markov-equivalence-class output of PC.
// Undirected edges are stored once with the lower index first.
struct Pdag {
  std::vector<std::string> nodes;
  std::vector<Edge> directed;
  std::vector<Edge> undirected;

  bool has_directed(int from, int to) const;
  bool has_undirected(int a, int b) const;
  bool adjacent(int a, int b) const;
  // Unordered pairs {a, b} with a < b.
  std::vector<Edge> skeleton() const;
  static Pdag from_dag(const Dag& dag);
};

// True iff every trail between `a` and `b` is blocked by `given`.
// Throws on unknown nodes, a == b, or a/b inside `given`.
bool d_separated(const Dag& graph, int a, int b, std::span<const int> given);
bool d_separated(const Dag& graph, std::string_view a, std::string_view b,
                 std::span<const std::string> given);

}  // namespace causeway

#endif  // CAUSEWAY_DAG_H_
