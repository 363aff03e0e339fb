#include "causeway/structure_learning.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <boost/math/special_functions/gamma.hpp>

#include "causeway/error.h"
#include "causeway/rng.h"

namespace causeway {

int DiscreteData::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].name == name) return static_cast<int>(i);
  }
  throw Error("unknown variable '" + std::string(name) + "'");
}

std::vector<std::string> DiscreteData::names() const {
  std::vector<std::string> out;
  for (const auto& v : variables) out.push_back(v.name);
  return out;
}

DiscreteData DiscreteData::select_rows(std::span<const std::size_t> rows) const {
  DiscreteData out;
  out.variables = variables;
  out.columns.resize(columns.size());
  for (std::size_t v = 0; v < columns.size(); ++v) {
    out.columns[v].reserve(rows.size());
    for (std::size_t r : rows) out.columns[v].push_back(columns[v].at(r));
  }
  return out;
}

DiscreteData DiscreteData::from_dataset(const Dataset& data) {
  DiscreteData out;
  const Schema& schema = data.schema();
  for (std::size_t v = 0; v < schema.size(); ++v) {
    const auto& spec = schema[v];
    if (spec.kind != VariableKind::kCategorical) {
      throw Error("variable '" + spec.name + "' is continuous; discretize it first");
    }
    out.variables.push_back({spec.name, spec.levels});
    std::vector<int> col(data.num_rows());
    for (std::size_t r = 0; r < col.size(); ++r) col[r] = data.code(r, v);
    out.columns.push_back(std::move(col));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_var(const DiscreteData& data, int v) {
  if (v < 0 || static_cast<std::size_t>(v) >= data.num_variables()) {
    throw Error("variable index " + std::to_string(v) + " out of range");
  }
}

std::size_t num_strata(const DiscreteData& data, std::span<const int> z) {
  std::size_t s = 1;
  for (int v : z) s *= static_cast<std::size_t>(data.cardinality(v));
  return s;
}

double table_cells(const DiscreteData& data, int a, int b, std::span<const int> z) {
  double cells = static_cast<double>(data.cardinality(a)) * data.cardinality(b);
  for (int v : z) cells *= data.cardinality(v);
  return cells;
}

}  // namespace

G2Result g2_from_counts(std::span<const double> counts, int rows, int cols, std::size_t strata) {
  if (rows < 1 || cols < 1) throw Error("g2: table needs at least one row and column");
  const std::size_t cell = static_cast<std::size_t>(rows) * cols;
  if (counts.size() != cell * strata) throw Error("g2: counts do not match the table shape");
  G2Result out;
  std::vector<double> row_sum(rows), col_sum(cols);
  for (std::size_t s = 0; s < strata; ++s) {
    const double* t = counts.data() + s * cell;
    std::fill(row_sum.begin(), row_sum.end(), 0.0);
    std::fill(col_sum.begin(), col_sum.end(), 0.0);
    double total = 0;
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        if (t[i * cols + j] < 0) throw Error("g2: negative count");
        row_sum[i] += t[i * cols + j];
        col_sum[j] += t[i * cols + j];
        total += t[i * cols + j];
      }
    }
    if (total <= 0) continue;
    int nz_rows = 0, nz_cols = 0;
    for (double r : row_sum) nz_rows += r > 0;
    for (double c : col_sum) nz_cols += c > 0;
    out.dof += (nz_rows - 1) * (nz_cols - 1);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        const double o = t[i * cols + j];
        if (o > 0) out.statistic += 2.0 * o * std::log(o * total / (row_sum[i] * col_sum[j]));
      }
    }
  }
  out.statistic = std::max(out.statistic, 0.0);
  out.p_value = out.dof > 0 ? boost::math::gamma_q(out.dof / 2.0, out.statistic / 2.0) : 1.0;
  return out;
}

G2Result g2_test(const DiscreteData& data, int a, int b, std::span<const int> z) {
  check_var(data, a);
  check_var(data, b);
  for (int v : z) check_var(data, v);
  if (a == b) throw Error("g2_test: a and b must differ");
  if (std::find(z.begin(), z.end(), a) != z.end() || std::find(z.begin(), z.end(), b) != z.end()) {
    throw Error("g2_test: conditioning set contains a tested variable");
  }
  if (data.num_rows() == 0) throw Error("g2_test: empty data");
  const int ra = data.cardinality(a), rb = data.cardinality(b);
  const std::size_t strata = num_strata(data, z);
  std::vector<double> counts(strata * ra * rb, 0.0);
  const auto& ca = data.columns[a];
  const auto& cb = data.columns[b];
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    std::size_t s = 0;
    for (int v : z) s = s * data.cardinality(v) + data.columns[v][r];
    counts[(s * ra + ca[r]) * rb + cb[r]] += 1.0;
  }
  return g2_from_counts(counts, ra, rb, strata);
}

// ---------------------------------------------------------------------------
// PC

namespace {

// Mark matrix: m[a][b] && m[b][a] is a - b, m[a][b] alone is a -> b.
using Marks = std::vector<std::vector<char>>;

bool adj(const Marks& m, int a, int b) { return m[a][b] || m[b][a]; }
bool directed(const Marks& m, int a, int b) { return m[a][b] && !m[b][a]; }
bool undirected(const Marks& m, int a, int b) { return m[a][b] && m[b][a]; }

// Calls fn on every size-k subset of `pool` in lexicographic order; stops
// when fn returns true.
template <typename Fn>
bool for_each_subset(const std::vector<int>& pool, std::size_t k, Fn&& fn) {
  if (k > pool.size()) return false;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<int> subset(k);
  while (true) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = pool[idx[i]];
    if (fn(subset)) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == pool.size() - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

bool apply_meek(Marks& m) {
  const int n = static_cast<int>(m.size());
  bool changed_any = false;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        if (b == c || !undirected(m, b, c)) continue;
        bool orient = false;
        // R1: a -> b - c, a and c not adjacent.
        for (int a = 0; a < n && !orient; ++a) {
          orient = a != c && directed(m, a, b) && !adj(m, a, c);
        }
        // R2: b -> a -> c.
        for (int a = 0; a < n && !orient; ++a) {
          orient = directed(m, b, a) && directed(m, a, c);
        }
        // R3: b - x -> c, b - y -> c, x and y not adjacent.
        for (int x = 0; x < n && !orient; ++x) {
          if (!undirected(m, b, x) || !directed(m, x, c)) continue;
          for (int y = x + 1; y < n && !orient; ++y) {
            orient = undirected(m, b, y) && directed(m, y, c) && !adj(m, x, y);
          }
        }
        if (orient) {
          m[c][b] = 0;
          changed = changed_any = true;
        }
      }
    }
  }
  return changed_any;
}

}  // namespace

PcResult pc_learn(const DiscreteData& data, const PcOptions& opts) {
  if (!(opts.alpha > 0 && opts.alpha < 1)) throw Error("pc_learn: alpha must be in (0, 1)");
  if (data.num_rows() == 0) throw Error("pc_learn: empty data");
  const int n = static_cast<int>(data.num_variables());
  const double rows = static_cast<double>(data.num_rows());
  PcResult out;
  Marks m(n, std::vector<char>(n, 1));
  for (int i = 0; i < n; ++i) m[i][i] = 0;

  for (int level = 0;; ++level) {
    if (opts.max_condition_size >= 0 && level > opts.max_condition_size) break;
    // Adjacency sets are frozen per level so the result ignores pair order.
    std::vector<std::vector<int>> frozen(n);
    bool any = false;
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        if (adj(m, x, y)) frozen[x].push_back(y);
      }
      any = any || static_cast<int>(frozen[x].size()) - 1 >= level;
    }
    if (!any) break;
    for (int x = 0; x < n; ++x) {
      for (int y : frozen[x]) {
        if (!adj(m, x, y)) continue;
        std::vector<int> pool;
        for (int v : frozen[x]) {
          if (v != y) pool.push_back(v);
        }
        for_each_subset(pool, static_cast<std::size_t>(level), [&](const std::vector<int>& z) {
          if (rows < opts.min_rows_per_cell * table_cells(data, x, y, z)) {
            ++out.tests_skipped;
            return false;
          }
          ++out.tests_run;
          if (g2_test(data, x, y, z).p_value > opts.alpha) {
            m[x][y] = m[y][x] = 0;
            out.sepsets[{std::min(x, y), std::max(x, y)}] = z;
            return true;
          }
          return false;
        });
      }
    }
  }
  if (out.tests_run == 0 && out.tests_skipped > 0) {
    out.warning = "every independence test was skipped for lack of data; returning the complete graph";
  }

  // v-structures x -> y <- z for non-adjacent x, z with y outside sepset(x, z).
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      for (int z = x + 1; z < n; ++z) {
        if (x == y || z == y || adj(m, x, z) || !adj(m, x, y) || !adj(m, z, y)) continue;
        auto it = out.sepsets.find({x, z});
        if (it == out.sepsets.end()) continue;
        if (std::find(it->second.begin(), it->second.end(), y) != it->second.end()) continue;
        // Conflicting orientations keep whichever came first.
        if (undirected(m, x, y)) m[y][x] = 0;
        if (undirected(m, z, y)) m[y][z] = 0;
      }
    }
  }
  apply_meek(m);

  out.pdag.nodes = data.names();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (directed(m, a, b)) out.pdag.directed.emplace_back(a, b);
      if (a < b && undirected(m, a, b)) out.pdag.undirected.emplace_back(a, b);
    }
  }
  return out;
}

Dag pdag_to_dag(const Pdag& pdag) {
  const int n = static_cast<int>(pdag.nodes.size());
  Marks m(n, std::vector<char>(n, 0));
  for (auto [a, b] : pdag.directed) m.at(a).at(b) = 1;
  for (auto [a, b] : pdag.undirected) m.at(a).at(b) = m.at(b).at(a) = 1;

  Dag out(pdag.nodes);
  for (auto [a, b] : pdag.directed) out.add_edge(a, b);
  std::vector<char> alive(n, 1);
  for (int remaining = n; remaining > 0; --remaining) {
    int pick = -1;
    for (int x = n - 1; x >= 0 && pick < 0; --x) {
      if (!alive[x]) continue;
      bool sink = true;
      std::vector<int> nbrs, und;
      for (int y = 0; y < n; ++y) {
        if (!alive[y] || y == x) continue;
        if (directed(m, x, y)) sink = false;
        if (adj(m, x, y)) nbrs.push_back(y);
        if (undirected(m, x, y)) und.push_back(y);
      }
      if (!sink) continue;
      bool ok = true;
      for (int y : und) {
        for (int w : nbrs) {
          if (w != y && !adj(m, y, w)) ok = false;
        }
      }
      if (ok) pick = x;
    }
    if (pick < 0) throw Error("pdag_to_dag: the PDAG admits no consistent extension");
    for (int y = 0; y < n; ++y) {
      if (alive[y] && undirected(m, pick, y)) out.add_edge(y, pick);
    }
    alive[pick] = 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// BDeu

double bdeu_family(const DiscreteData& data, int child, std::span<const int> parents, double ess,
                   std::size_t max_configs) {
  if (!(ess > 0)) throw Error("bdeu: equivalent sample size must be > 0");
  check_var(data, child);
  std::size_t q = 1;
  for (int p : parents) {
    check_var(data, p);
    if (p == child) throw Error("bdeu: node listed as its own parent");
    q *= static_cast<std::size_t>(data.cardinality(p));
    if (q > max_configs) {
      throw Error("bdeu: " + std::to_string(q) + "+ parent configurations for '" +
                  data.variables[child].name + "' exceed the cap of " +
                  std::to_string(max_configs));
    }
  }
  const int r = data.cardinality(child);
  std::vector<double> counts(q * r, 0.0);
  const auto& cc = data.columns[child];
  for (std::size_t row = 0; row < data.num_rows(); ++row) {
    std::size_t j = 0;
    for (int p : parents) j = j * data.cardinality(p) + data.columns[p][row];
    counts[j * r + cc[row]] += 1.0;
  }
  const double a_ij = ess / q;
  const double a_ijk = ess / (static_cast<double>(q) * r);
  const double lg_ij = std::lgamma(a_ij);
  const double lg_ijk = std::lgamma(a_ijk);
  double score = 0;
  for (std::size_t j = 0; j < q; ++j) {
    double n_ij = 0;
    for (int k = 0; k < r; ++k) {
      const double n = counts[j * r + k];
      if (n > 0) score += std::lgamma(a_ijk + n) - lg_ijk;
      n_ij += n;
    }
    if (n_ij > 0) score += lg_ij - std::lgamma(a_ij + n_ij);
  }
  return score;
}

double bdeu_score(const DiscreteData& data, const Dag& graph, double ess, std::size_t max_configs) {
  if (graph.num_nodes() != data.num_variables()) {
    throw Error("bdeu_score: graph and data have different variables");
  }
  double total = 0;
  for (int v = 0; v < static_cast<int>(graph.num_nodes()); ++v) {
    total += bdeu_family(data, v, graph.parents(v), ess, max_configs);
  }
  return total;
}

BdeuScorer::BdeuScorer(const DiscreteData& data, double ess, std::size_t max_configs)
    : data_(&data), ess_(ess), max_configs_(max_configs) {
  if (!(ess > 0)) throw Error("bdeu: equivalent sample size must be > 0");
}

bool BdeuScorer::feasible(int child, std::span<const int> parents) const {
  (void)child;
  std::size_t q = 1;
  for (int p : parents) {
    q *= static_cast<std::size_t>(data_->cardinality(p));
    if (q > max_configs_) return false;
  }
  return true;
}

double BdeuScorer::family(int child, std::span<const int> parents) {
  std::pair<int, std::vector<int>> key{child, {parents.begin(), parents.end()}};
  std::sort(key.second.begin(), key.second.end());
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const double s = bdeu_family(*data_, child, key.second, ess_, max_configs_);
  std::lock_guard lock(mutex_);
  cache_.emplace(std::move(key), s);
  return s;
}

double BdeuScorer::score(const Dag& graph) {
  if (graph.num_nodes() != data_->num_variables()) {
    throw Error("bdeu_score: graph and data have different variables");
  }
  double total = 0;
  for (int v = 0; v < static_cast<int>(graph.num_nodes()); ++v) total += family(v, graph.parents(v));
  return total;
}

// ---------------------------------------------------------------------------
// Annealing

nlohmann::json ScoredNetwork::to_json() const {
  nlohmann::json doc = dag.to_json();
  doc["score"] = score;
  return doc;
}

ScoredNetwork ScoredNetwork::from_json(const nlohmann::json& doc) {
  ScoredNetwork out;
  out.dag = Dag::from_json(doc);
  try {
    out.score = doc.at("score").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("network json: ") + e.what());
  }
  return out;
}

void AnnealingSchedule::validate() const {
  if (!(t0 > 0)) throw Error("annealing schedule: T0 must be > 0");
  if (!(cooling > 0 && cooling < 1)) throw Error("annealing schedule: cooling must be in (0, 1)");
}

bool Knowledge::is_forbidden(int from, int to) const {
  return std::find(forbidden.begin(), forbidden.end(), Edge{from, to}) != forbidden.end();
}

bool Knowledge::is_required(int from, int to) const {
  return std::find(required.begin(), required.end(), Edge{from, to}) != required.end();
}

namespace {

// Best first; equal scores ordered by edge list.
bool better(const ScoredNetwork& a, const ScoredNetwork& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.dag.edges() < b.dag.edges();
}

class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  void offer(const Dag& dag, double score) {
    if (best_.size() == k_ && !(score >= best_.back().score)) return;
    const auto edges = dag.edges();
    for (const auto& e : edge_sets_) {
      if (e == edges) return;
    }
    best_.push_back({dag, score});
    edge_sets_.push_back(edges);
    std::vector<std::size_t> order(best_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return better(best_[a], best_[b]); });
    std::vector<ScoredNetwork> nb;
    std::vector<std::vector<Edge>> ne;
    for (std::size_t i = 0; i < std::min(k_, order.size()); ++i) {
      nb.push_back(std::move(best_[order[i]]));
      ne.push_back(std::move(edge_sets_[order[i]]));
    }
    best_ = std::move(nb);
    edge_sets_ = std::move(ne);
  }

  double best_score() const { return best_.front().score; }
  std::vector<ScoredNetwork> take() { return std::move(best_); }

 private:
  std::size_t k_;
  std::vector<ScoredNetwork> best_;
  std::vector<std::vector<Edge>> edge_sets_;
};

std::vector<int> with_parent(const std::vector<int>& parents, int add) {
  std::vector<int> out = parents;
  out.insert(std::upper_bound(out.begin(), out.end(), add), add);
  return out;
}

std::vector<int> without_parent(const std::vector<int>& parents, int drop) {
  std::vector<int> out;
  for (int p : parents) {
    if (p != drop) out.push_back(p);
  }
  return out;
}

}  // namespace

std::vector<ScoredNetwork> sa_search(BdeuScorer& scorer, const Dag& init, std::size_t k,
                                     const AnnealingSchedule& schedule, std::uint64_t seed,
                                     const Knowledge& knowledge, std::vector<double>* best_trace) {
  schedule.validate();
  if (k < 1) throw Error("sa_search: k must be >= 1");
  const int n = static_cast<int>(init.num_nodes());
  if (static_cast<std::size_t>(n) != scorer.data().num_variables()) {
    throw Error("sa_search: initial graph and data have different variables");
  }
  for (auto [a, b] : init.edges()) {
    if (knowledge.is_forbidden(a, b)) throw Error("sa_search: initial graph has a forbidden edge");
  }
  Dag current = init;
  for (auto [a, b] : knowledge.required) {
    if (!current.has_edge(a, b)) current.add_edge(a, b);
  }

  std::vector<double> family(n);
  for (int v = 0; v < n; ++v) family[v] = scorer.family(v, current.parents(v));
  double score = std::accumulate(family.begin(), family.end(), 0.0);
  TopK top(k);
  top.offer(current, score);
  if (best_trace) {
    best_trace->clear();
    best_trace->reserve(schedule.steps);
  }

  Rng rng = make_rng(seed, 0x5A);
  double temperature = schedule.t0;
  for (std::size_t step = 0; step < schedule.steps; ++step, temperature *= schedule.cooling) {
    if (best_trace) best_trace->push_back(top.best_score());
    if (n < 2) continue;
    int i = static_cast<int>(uniform_index(rng, n));
    int j = static_cast<int>(uniform_index(rng, n - 1));
    if (j >= i) ++j;
    if (current.has_edge(j, i)) std::swap(i, j);
    const bool coin = uniform01(rng) < 0.5;
    const double u = uniform01(rng);

    // Proposal: new parent sets of at most two families.
    int f1 = -1, f2 = -1;
    std::vector<int> p1, p2;
    enum { kAdd, kDelete, kReverse } move;
    if (!current.has_edge(i, j)) {
      move = kAdd;
      if (knowledge.is_forbidden(i, j) || !current.can_add_edge(i, j)) continue;
      f1 = j;
      p1 = with_parent(current.parents(j), i);
    } else if (coin) {
      move = kDelete;
      if (knowledge.is_required(i, j)) continue;
      f1 = j;
      p1 = without_parent(current.parents(j), i);
    } else {
      move = kReverse;
      if (knowledge.is_required(i, j) || knowledge.is_forbidden(j, i)) continue;
      current.remove_edge(i, j);
      const bool ok = current.can_add_edge(j, i);
      current.add_edge(i, j);
      if (!ok) continue;
      f1 = j;
      p1 = without_parent(current.parents(j), i);
      f2 = i;
      p2 = with_parent(current.parents(i), j);
    }
    if (!scorer.feasible(f1, p1) || (f2 >= 0 && !scorer.feasible(f2, p2))) continue;
    const double s1 = scorer.family(f1, p1);
    const double s2 = f2 >= 0 ? scorer.family(f2, p2) : 0.0;
    const double delta = s1 - family[f1] + (f2 >= 0 ? s2 - family[f2] : 0.0);
    if (!(delta >= 0 || u < std::exp(delta / temperature))) continue;

    switch (move) {
      case kAdd:
        current.add_edge(i, j);
        break;
      case kDelete:
        current.remove_edge(i, j);
        break;
      case kReverse:
        current.remove_edge(i, j);
        current.add_edge(j, i);
        break;
    }
    family[f1] = s1;
    if (f2 >= 0) family[f2] = s2;
    score = std::accumulate(family.begin(), family.end(), 0.0);
    top.offer(current, score);
    if (best_trace) best_trace->back() = top.best_score();
  }
  return top.take();
}

std::vector<ScoredNetwork> sa_search(const DiscreteData& data, const Dag& init, std::size_t k,
                                     const AnnealingSchedule& schedule, std::uint64_t seed,
                                     double ess) {
  BdeuScorer scorer(data, ess);
  return sa_search(scorer, init, k, schedule, seed);
}

std::vector<ScoredNetwork> merge_top_k(std::span<const std::vector<ScoredNetwork>> lists,
                                       std::size_t k) {
  if (k < 1) throw Error("merge_top_k: k must be >= 1");
  TopK top(k);
  for (const auto& list : lists) {
    for (const auto& net : list) top.offer(net.dag, net.score);
  }
  return top.take();
}

}  // namespace causeway
