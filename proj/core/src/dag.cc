#include "causeway/dag.h"

#include <algorithm>
#include <deque>
#include <sstream>

#include "causeway/error.h"

namespace causeway {

Dag::Dag(std::vector<std::string> nodes)
    : nodes_(std::move(nodes)), parents_(nodes_.size()), children_(nodes_.size()) {
  std::vector<std::string> sorted = nodes_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error("dag: duplicate node name");
  }
}

Dag::Dag(std::vector<std::string> nodes, std::span<const Edge> edges) : Dag(std::move(nodes)) {
  for (const auto& [from, to] : edges) add_edge(from, to);
}

int Dag::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i] == name) return static_cast<int>(i);
  }
  throw Error("dag: unknown node '" + std::string(name) + "'");
}

void Dag::check_node(int node) const {
  if (node < 0 || static_cast<std::size_t>(node) >= nodes_.size()) {
    throw Error("dag: node index " + std::to_string(node) + " out of range");
  }
}

bool Dag::has_edge(int from, int to) const {
  const auto& ps = parents_[to];
  return std::binary_search(ps.begin(), ps.end(), from);
}

std::size_t Dag::num_edges() const {
  std::size_t n = 0;
  for (const auto& ps : parents_) n += ps.size();
  return n;
}

std::vector<Edge> Dag::edges() const {
  std::vector<Edge> out;
  for (std::size_t p = 0; p < children_.size(); ++p) {
    for (int c : children_[p]) out.emplace_back(static_cast<int>(p), c);
  }
  return out;
}

bool Dag::has_path(int from, int to) const {
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<int> stack(children_[from].begin(), children_[from].end());
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (v == to) return true;
    if (seen[v]) continue;
    seen[v] = 1;
    stack.insert(stack.end(), children_[v].begin(), children_[v].end());
  }
  return false;
}

bool Dag::can_add_edge(int from, int to) const {
  if (from == to || has_edge(from, to)) return false;
  return !has_path(to, from);
}

void Dag::add_edge(int from, int to) {
  check_node(from);
  check_node(to);
  if (from == to) throw Error("dag: self-loop on '" + nodes_[from] + "'");
  if (has_edge(from, to)) {
    throw Error("dag: duplicate edge " + nodes_[from] + " -> " + nodes_[to]);
  }
  if (has_path(to, from)) {
    throw Error("dag: edge " + nodes_[from] + " -> " + nodes_[to] + " would create a cycle");
  }
  auto& ps = parents_[to];
  ps.insert(std::upper_bound(ps.begin(), ps.end(), from), from);
  auto& cs = children_[from];
  cs.insert(std::upper_bound(cs.begin(), cs.end(), to), to);
}

void Dag::remove_edge(int from, int to) {
  check_node(from);
  check_node(to);
  if (!has_edge(from, to)) {
    throw Error("dag: no edge " + nodes_[from] + " -> " + nodes_[to]);
  }
  auto& ps = parents_[to];
  ps.erase(std::lower_bound(ps.begin(), ps.end(), from));
  auto& cs = children_[from];
  cs.erase(std::lower_bound(cs.begin(), cs.end(), to));
}

std::vector<int> Dag::topological_order() const {
  const std::size_t n = nodes_.size();
  std::vector<std::size_t> indegree(n);
  for (std::size_t v = 0; v < n; ++v) indegree[v] = parents_[v].size();
  std::vector<int> order;
  order.reserve(n);
  // n is small; a linear scan for the lowest ready node keeps ties stable.
  std::vector<char> done(n, 0);
  for (std::size_t step = 0; step < n; ++step) {
    int next = -1;
    for (std::size_t v = 0; v < n; ++v) {
      if (!done[v] && indegree[v] == 0) {
        next = static_cast<int>(v);
        break;
      }
    }
    if (next < 0) throw Error("dag: graph has a cycle");
    done[next] = 1;
    order.push_back(next);
    for (int c : children_[next]) --indegree[c];
  }
  return order;
}

std::vector<int> Dag::descendants(int node) const {
  check_node(node);
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<int> stack(children_[node].begin(), children_[node].end());
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (seen[v]) continue;
    seen[v] = 1;
    stack.insert(stack.end(), children_[v].begin(), children_[v].end());
  }
  std::vector<int> out;
  for (std::size_t v = 0; v < seen.size(); ++v) {
    if (seen[v]) out.push_back(static_cast<int>(v));
  }
  return out;
}

nlohmann::json Dag::to_json() const {
  nlohmann::json edges_json = nlohmann::json::array();
  for (const auto& [p, c] : edges()) edges_json.push_back({nodes_[p], nodes_[c]});
  return nlohmann::json{{"nodes", nodes_}, {"edges", std::move(edges_json)}};
}

Dag Dag::from_json(const nlohmann::json& doc) {
  try {
    Dag dag(doc.at("nodes").get<std::vector<std::string>>());
    for (const auto& e : doc.at("edges")) {
      dag.add_edge(dag.index_of(e.at(0).get<std::string>()),
                   dag.index_of(e.at(1).get<std::string>()));
    }
    return dag;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("dag json: ") + e.what());
  }
}

std::string Dag::to_dot(std::string_view graph_name) const {
  std::ostringstream out;
  out << "digraph \"" << graph_name << "\" {\n";
  for (const auto& n : nodes_) out << "  \"" << n << "\";\n";
  for (const auto& [p, c] : edges()) {
    out << "  \"" << nodes_[p] << "\" -> \"" << nodes_[c] << "\";\n";
  }
  out << "}\n";
  return out.str();
}

bool Pdag::has_directed(int from, int to) const {
  return std::find(directed.begin(), directed.end(), Edge{from, to}) != directed.end();
}

bool Pdag::has_undirected(int a, int b) const {
  const Edge e{std::min(a, b), std::max(a, b)};
  return std::find(undirected.begin(), undirected.end(), e) != undirected.end();
}

bool Pdag::adjacent(int a, int b) const {
  return has_directed(a, b) || has_directed(b, a) || has_undirected(a, b);
}

std::vector<Edge> Pdag::skeleton() const {
  std::vector<Edge> out;
  for (const auto& [a, b] : directed) out.emplace_back(std::min(a, b), std::max(a, b));
  out.insert(out.end(), undirected.begin(), undirected.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Pdag Pdag::from_dag(const Dag& dag) {
  Pdag p;
  p.nodes = dag.nodes();
  p.directed = dag.edges();
  return p;
}

bool d_separated(const Dag& graph, int a, int b, std::span<const int> given) {
  const int n = static_cast<int>(graph.num_nodes());
  auto check = [n](int v) {
    if (v < 0 || v >= n) throw Error("d_separated: unknown node index " + std::to_string(v));
  };
  check(a);
  check(b);
  if (a == b) throw Error("d_separated: query nodes must differ");
  std::vector<char> in_given(n, 0);
  for (int z : given) {
    check(z);
    in_given[z] = 1;
  }
  if (in_given[a] || in_given[b]) {
    throw Error("d_separated: query node inside the conditioning set");
  }

  // Conditioning nodes and their ancestors: colliders there are open.
  std::vector<char> opens_collider(n, 0);
  std::vector<int> stack(given.begin(), given.end());
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (opens_collider[v]) continue;
    opens_collider[v] = 1;
    for (int p : graph.parents(v)) stack.push_back(p);
  }

  // Reachability over (node, arrived-from-child) states.
  enum : int { kFromChild = 0, kFromParent = 1 };
  std::vector<char> visited(static_cast<std::size_t>(n) * 2, 0);
  std::deque<std::pair<int, int>> queue{{a, kFromChild}};
  while (!queue.empty()) {
    const auto [v, dir] = queue.front();
    queue.pop_front();
    if (visited[v * 2 + dir]) continue;
    visited[v * 2 + dir] = 1;
    if (v == b) return false;
    if (dir == kFromChild) {
      if (in_given[v]) continue;
      for (int p : graph.parents(v)) queue.emplace_back(p, kFromChild);
      for (int c : graph.children(v)) queue.emplace_back(c, kFromParent);
    } else {
      if (!in_given[v]) {
        for (int c : graph.children(v)) queue.emplace_back(c, kFromParent);
      }
      if (opens_collider[v]) {
        for (int p : graph.parents(v)) queue.emplace_back(p, kFromChild);
      }
    }
  }
  return true;
}

bool d_separated(const Dag& graph, std::string_view a, std::string_view b,
                 std::span<const std::string> given) {
  std::vector<int> z;
  for (const auto& name : given) z.push_back(graph.index_of(name));
  return d_separated(graph, graph.index_of(a), graph.index_of(b), z);
}

}  // namespace causeway
