#include "causeway/cbn_inference.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "causeway/error.h"
#include "causeway/parallel.h"

namespace causeway {

CptSet fit_cpts(const DiscreteData& data, const Dag& graph, double ess) {
  if (!(ess > 0)) throw Error("fit_cpts: equivalent sample size must be > 0");
  const int n = static_cast<int>(graph.num_nodes());
  std::vector<int> column(n);
  CptSet out;
  for (int v = 0; v < n; ++v) {
    column[v] = data.index_of(graph.name(v));
    out.variables.push_back(data.variables[column[v]]);
  }
  for (int v = 0; v < n; ++v) {
    Cpt t;
    t.parents = graph.parents(v);
    t.cardinality = data.cardinality(column[v]);
    for (int p : t.parents) t.parent_cards.push_back(data.cardinality(column[p]));
    const std::size_t q = t.num_configs();
    const int r = t.cardinality;
    const double a_ijk = ess / (static_cast<double>(q) * r);
    t.posterior.assign(q * r, a_ijk);
    const auto& child = data.columns[column[v]];
    for (std::size_t row = 0; row < data.num_rows(); ++row) {
      std::size_t j = 0;
      for (std::size_t i = 0; i < t.parents.size(); ++i) {
        j = j * t.parent_cards[i] + data.columns[column[t.parents[i]]][row];
      }
      t.posterior[j * r + child[row]] += 1.0;
    }
    t.probs.resize(q * r);
    for (std::size_t j = 0; j < q; ++j) {
      double total = 0;
      for (int k = 0; k < r; ++k) total += t.posterior[j * r + k];
      for (int k = 0; k < r; ++k) t.probs[j * r + k] = t.posterior[j * r + k] / total;
    }
    out.tables.push_back(std::move(t));
  }
  return out;
}

CptSet sample_cpts(const CptSet& fitted, Rng& rng) {
  CptSet out = fitted;
  for (std::size_t v = 0; v < out.size(); ++v) {
    Cpt& t = out.tables[v];
    if (t.posterior.size() != t.probs.size()) {
      throw Error("sample_cpts: table has no posterior parameters");
    }
    const int r = t.cardinality;
    for (std::size_t j = 0; j < t.num_configs(); ++j) {
      double total = 0;
      for (int k = 0; k < r; ++k) {
        t.probs[j * r + k] = gamma_variate(rng, t.posterior[j * r + k]);
        total += t.probs[j * r + k];
      }
      // Every gamma draw underflowed; fall back to the posterior mean.
      if (!(total > 0)) {
        for (int k = 0; k < r; ++k) t.probs[j * r + k] = fitted.tables[v].probs[j * r + k];
        continue;
      }
      for (int k = 0; k < r; ++k) t.probs[j * r + k] /= total;
    }
  }
  return out;
}

Dag mutilate(const Dag& graph, int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= graph.num_nodes()) {
    throw Error("mutilate: unknown node index " + std::to_string(target));
  }
  Dag out = graph;
  for (int p : graph.parents(target)) out.remove_edge(p, target);
  return out;
}

Dag mutilate(const Dag& graph, std::string_view target) {
  return mutilate(graph, graph.index_of(target));
}

// ---------------------------------------------------------------------------
// Junction tree

namespace {

Factor cpt_factor(int node, const Cpt& t, std::span<const int> cards) {
  std::vector<int> vars = t.parents;
  vars.insert(std::upper_bound(vars.begin(), vars.end(), node), node);
  std::vector<int> fcards;
  for (int v : vars) fcards.push_back(cards[v]);
  Factor f = Factor::ones(vars, fcards);
  std::vector<int> digit(vars.size(), 0);
  const std::size_t child_pos = std::lower_bound(vars.begin(), vars.end(), node) - vars.begin();
  for (std::size_t pos = 0; pos < f.size(); ++pos) {
    std::size_t j = 0;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (i != child_pos) j = j * cards[vars[i]] + digit[i];
    }
    f.values[pos] = t.probs[j * t.cardinality + digit[child_pos]];
    for (std::size_t i = vars.size(); i-- > 0;) {
      if (++digit[i] < fcards[i]) break;
      digit[i] = 0;
    }
  }
  return f;
}

std::vector<int> intersect(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

JunctionTree::JunctionTree(const Dag& graph, const CptSet& cpts, double max_states) {
  cpts.validate(graph, 1e-9);
  const int n = static_cast<int>(graph.num_nodes());
  num_nodes_ = graph.num_nodes();
  for (int v = 0; v < n; ++v) cards_.push_back(cpts.cardinality(v));
  if (n == 0) throw Error("junction tree: empty graph");

  // Moral graph.
  std::vector<std::vector<char>> g(n, std::vector<char>(n, 0));
  for (int v = 0; v < n; ++v) {
    const auto& pa = graph.parents(v);
    for (int p : pa) g[p][v] = g[v][p] = 1;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      for (std::size_t j = i + 1; j < pa.size(); ++j) g[pa[i]][pa[j]] = g[pa[j]][pa[i]] = 1;
    }
  }

  // Min-fill elimination; ties go to the lowest index.
  std::vector<char> alive(n, 1);
  std::vector<std::vector<int>> candidates;
  for (int step = 0; step < n; ++step) {
    int pick = -1;
    long best_fill = -1;
    for (int v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      std::vector<int> nb;
      for (int u = 0; u < n; ++u) {
        if (alive[u] && g[v][u]) nb.push_back(u);
      }
      long fill = 0;
      for (std::size_t i = 0; i < nb.size(); ++i) {
        for (std::size_t j = i + 1; j < nb.size(); ++j) fill += !g[nb[i]][nb[j]];
      }
      if (pick < 0 || fill < best_fill) {
        pick = v;
        best_fill = fill;
      }
    }
    std::vector<int> clique{pick};
    for (int u = 0; u < n; ++u) {
      if (alive[u] && g[pick][u]) clique.push_back(u);
    }
    for (std::size_t i = 1; i < clique.size(); ++i) {
      for (std::size_t j = i + 1; j < clique.size(); ++j) g[clique[i]][clique[j]] = g[clique[j]][clique[i]] = 1;
    }
    std::sort(clique.begin(), clique.end());
    candidates.push_back(std::move(clique));
    alive[pick] = 0;
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    bool maximal = true;
    for (std::size_t j = 0; j < candidates.size() && maximal; ++j) {
      if (i == j) continue;
      const bool sub = std::includes(candidates[j].begin(), candidates[j].end(),
                                     candidates[i].begin(), candidates[i].end());
      if (sub && (candidates[j].size() > candidates[i].size() || j < i)) maximal = false;
    }
    if (maximal) cliques_.push_back(candidates[i]);
  }
  for (const auto& c : cliques_) {
    double states = 1;
    for (int v : c) states *= cards_[v];
    if (states > max_states) {
      throw Error("junction tree: a clique has " + std::to_string(static_cast<long long>(states)) +
                  " states, above the cap of " + std::to_string(static_cast<long long>(max_states)));
    }
  }

  // Maximum spanning tree on separator size (Kruskal, ties by clique index).
  const std::size_t nc = cliques_.size();
  struct Cand {
    std::size_t weight;
    int a, b;
  };
  std::vector<Cand> cands;
  for (std::size_t a = 0; a < nc; ++a) {
    for (std::size_t b = a + 1; b < nc; ++b) {
      cands.push_back({intersect(cliques_[a], cliques_[b]).size(), static_cast<int>(a),
                       static_cast<int>(b)});
    }
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Cand& x, const Cand& y) { return x.weight > y.weight; });
  std::vector<int> root(nc);
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](int x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  std::vector<std::vector<std::pair<int, int>>> tree(nc);  // (neighbour, edge)
  for (const auto& c : cands) {
    const int ra = find(c.a), rb = find(c.b);
    if (ra == rb) continue;
    root[ra] = rb;
    tree[c.a].emplace_back(c.b, static_cast<int>(edges_.size()));
    tree[c.b].emplace_back(c.a, static_cast<int>(edges_.size()));
    edges_.emplace_back(c.a, c.b);
    separators_.push_back(intersect(cliques_[c.a], cliques_[c.b]));
  }

  // Breadth-first order from clique 0.
  parent_edge_.assign(nc, -1);
  std::vector<char> seen(nc, 0);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = 1;
  while (!bfs.empty()) {
    const int c = bfs.front();
    bfs.pop();
    order_.push_back(c);
    for (auto [nb, e] : tree[c]) {
      if (seen[nb]) continue;
      seen[nb] = 1;
      parent_edge_[nb] = e;
      bfs.push(nb);
    }
  }

  // Each family goes to the first clique that covers it.
  family_clique_.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    std::vector<int> fam = graph.parents(v);
    fam.insert(std::upper_bound(fam.begin(), fam.end(), v), v);
    for (std::size_t c = 0; c < nc; ++c) {
      if (std::includes(cliques_[c].begin(), cliques_[c].end(), fam.begin(), fam.end())) {
        family_clique_[v] = static_cast<int>(c);
        break;
      }
    }
    if (family_clique_[v] < 0) throw Error("junction tree: family not covered by any clique");
  }
  load(cpts);
}

void JunctionTree::load(const CptSet& cpts) {
  if (cpts.size() != num_nodes_) throw Error("junction tree: table count differs from node count");
  base_.clear();
  for (const auto& c : cliques_) {
    std::vector<int> cc;
    for (int v : c) cc.push_back(cards_[v]);
    base_.push_back(Factor::ones(c, cc));
  }
  for (std::size_t v = 0; v < num_nodes_; ++v) {
    if (cpts.cardinality(static_cast<int>(v)) != cards_[v]) {
      throw Error("junction tree: cardinality changed on load");
    }
    multiply_into(base_[family_clique_[v]], cpt_factor(static_cast<int>(v), cpts.tables[v], cards_));
  }
  calibrated_ = false;
}

void JunctionTree::calibrate(std::span<const CodeAssignment> evidence) {
  potentials_ = base_;
  for (auto [var, level] : evidence) {
    if (var < 0 || static_cast<std::size_t>(var) >= num_nodes_) {
      throw Error("junction tree: unknown evidence variable " + std::to_string(var));
    }
    if (level < 0 || level >= cards_[var]) throw Error("junction tree: evidence level out of range");
    for (auto& p : potentials_) p.reduce(var, level);
  }
  std::vector<Factor> sep(edges_.size());
  // Collect towards the root, then distribute back out.
  for (std::size_t i = order_.size(); i-- > 1;) {
    const int c = order_[i];
    const int e = parent_edge_[c];
    const int parent = edges_[e].first == c ? edges_[e].second : edges_[e].first;
    sep[e] = marginalize(potentials_[c], separators_[e]);
    multiply_into(potentials_[parent], sep[e]);
  }
  for (std::size_t i = 1; i < order_.size(); ++i) {
    const int c = order_[i];
    const int e = parent_edge_[c];
    const int parent = edges_[e].first == c ? edges_[e].second : edges_[e].first;
    Factor fresh = marginalize(potentials_[parent], separators_[e]);
    multiply_into(potentials_[c], divide(fresh, sep[e]));
    sep[e] = std::move(fresh);
  }
  calibrated_ = true;
}

std::vector<double> JunctionTree::marginal(int query) const {
  if (!calibrated_) throw Error("junction tree: marginal before calibration");
  if (query < 0 || static_cast<std::size_t>(query) >= num_nodes_) {
    throw Error("junction tree: unknown query variable " + std::to_string(query));
  }
  int best = -1;
  for (std::size_t c = 0; c < cliques_.size(); ++c) {
    if (!std::binary_search(cliques_[c].begin(), cliques_[c].end(), query)) continue;
    if (best < 0 || cliques_[c].size() < cliques_[best].size()) best = static_cast<int>(c);
  }
  const int keep[] = {query};
  Factor m = marginalize(potentials_[best], keep);
  if (!(m.total() > 0)) throw Error("junction tree: evidence has probability zero");
  m.normalize();
  return m.values;
}

std::vector<double> marginal(JunctionTree& jt, int query, std::span<const CodeAssignment> evidence) {
  for (auto [var, level] : evidence) {
    (void)level;
    if (var == query) throw Error("marginal: query variable is also evidence");
  }
  jt.calibrate(evidence);
  return jt.marginal(query);
}

namespace {

void set_point_mass(CptSet& cpts, int node, int level) {
  Cpt& t = cpts.tables.at(node);
  t.parents.clear();
  t.parent_cards.clear();
  t.probs.assign(t.cardinality, 0.0);
  t.posterior.clear();
  if (level < 0 || level >= t.cardinality) throw Error("intervention level out of range");
  t.probs[level] = 1.0;
}

CptSet with_point_mass(CptSet cpts, int node, int level) {
  set_point_mass(cpts, node, level);
  return cpts;
}

}  // namespace

std::vector<double> do_marginal(const Dag& graph, const CptSet& cpts, CodeAssignment intervention,
                                int query) {
  const auto [node, level] = intervention;
  if (node == query) throw Error("do_marginal: query is the intervention node");
  const Dag mutilated = mutilate(graph, node);
  CptSet tables = cpts;
  set_point_mass(tables, node, level);
  JunctionTree jt(mutilated, tables);
  jt.calibrate();
  return jt.marginal(query);
}

CausalQuery CausalQuery::resolve(const std::vector<DiscreteVariable>& variables,
                                 std::string_view treatment, std::string_view treated,
                                 std::string_view control, std::string_view outcome) {
  auto var = [&](std::string_view name) {
    for (std::size_t i = 0; i < variables.size(); ++i) {
      if (variables[i].name == name) return static_cast<int>(i);
    }
    throw Error("unknown variable '" + std::string(name) + "'");
  };
  auto level = [&](int v, std::string_view label) {
    const auto& levels = variables[v].levels;
    for (std::size_t k = 0; k < levels.size(); ++k) {
      if (levels[k] == label) return static_cast<int>(k);
    }
    throw Error("'" + std::string(label) + "' is not a level of '" + variables[v].name + "'");
  };
  CausalQuery q;
  q.treatment = var(treatment);
  q.outcome = var(outcome);
  if (q.treatment == q.outcome) throw Error("treatment and outcome must differ");
  q.treated = level(q.treatment, treated);
  q.control = level(q.treatment, control);
  q.outcome_level = level(q.outcome, "1");
  return q;
}

double InterventionalRisks::ratio() const {
  if (!(control > 0)) throw Error("ace: interventional control risk is zero");
  return treated / control;
}

AceEvaluator::AceEvaluator(const Dag& graph, const CptSet& cpts, const CausalQuery& q)
    : mutilated_(mutilate(graph, q.treatment)),
      q_(q),
      work_(with_point_mass(cpts, q.treatment, q.treated)),
      jt_(mutilated_, work_) {}

InterventionalRisks AceEvaluator::evaluate(const CptSet& cpts) {
  for (std::size_t v = 0; v < cpts.size(); ++v) {
    if (static_cast<int>(v) != q_.treatment) work_.tables[v].probs = cpts.tables[v].probs;
  }
  InterventionalRisks out;
  set_point_mass(work_, q_.treatment, q_.treated);
  jt_.load(work_);
  jt_.calibrate();
  out.treated = jt_.marginal(q_.outcome)[q_.outcome_level];
  if (q_.treated == q_.control) {
    out.control = out.treated;
    return out;
  }
  set_point_mass(work_, q_.treatment, q_.control);
  jt_.load(work_);
  jt_.calibrate();
  out.control = jt_.marginal(q_.outcome)[q_.outcome_level];
  return out;
}

double ace_do(const Dag& graph, const CptSet& cpts, const CausalQuery& q) {
  if (q.treated == q.control) return 1.0;
  AceEvaluator eval(graph, cpts, q);
  return eval.evaluate(cpts).ratio();
}

std::vector<double> posterior_ace_samples(const DiscreteData& data, const Dag& graph,
                                          const CausalQuery& q, std::size_t draws,
                                          std::uint64_t seed, double ess) {
  if (draws < 1) throw Error("posterior_ace_samples: need at least one draw");
  const CptSet fitted = fit_cpts(data, graph, ess);
  std::vector<double> out(draws);
  // Each worker evaluates a contiguous block with its own junction tree.
  const std::size_t block = 64;
  const std::size_t blocks = (draws + block - 1) / block;
  parallel_for(blocks, [&](std::size_t b) {
    AceEvaluator eval(graph, fitted, q);
    for (std::size_t d = b * block; d < std::min(draws, (b + 1) * block); ++d) {
      Rng rng = make_rng(seed, d);
      out[d] = eval.evaluate(sample_cpts(fitted, rng)).ratio();
    }
  });
  return out;
}

std::string_view to_string(ModelWeighting weighting) {
  return weighting == ModelWeighting::kUniform ? "uniform" : "score_posterior";
}

ModelWeighting parse_weighting(std::string_view text) {
  if (text == "uniform") return ModelWeighting::kUniform;
  if (text == "score_posterior") return ModelWeighting::kScorePosterior;
  throw Error("unknown model weighting '" + std::string(text) + "'");
}

double weighted_quantile(std::span<const double> values, std::span<const double> weights,
                         double prob) {
  if (values.empty() || values.size() != weights.size()) {
    throw Error("weighted_quantile: need equally sized non-empty inputs");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0)) throw Error("weighted_quantile: weights sum to zero");
  const double target = std::clamp(prob, 0.0, 1.0) * total;
  double cum = 0;
  for (std::size_t i : order) {
    cum += weights[i];
    if (cum >= target * (1 - 1e-12) && weights[i] > 0) return values[i];
  }
  return values[order.back()];
}

AveragedAce model_average_ace(std::span<const double> scores,
                              std::span<const std::vector<double>> samples,
                              ModelWeighting weighting, double level) {
  if (scores.empty()) throw Error("model_average_ace: empty network list");
  if (scores.size() != samples.size()) throw Error("model_average_ace: one sample set per network");
  if (!(level > 0 && level < 1)) throw Error("model_average_ace: level must be in (0, 1)");
  const std::size_t m = samples.front().size();
  for (const auto& s : samples) {
    if (s.size() != m || m == 0) throw Error("model_average_ace: sample counts must be equal and > 0");
  }
  AveragedAce out;
  out.samples.assign(samples.begin(), samples.end());
  out.weights.assign(scores.size(), 1.0);
  if (weighting == ModelWeighting::kScorePosterior) {
    const double top = *std::max_element(scores.begin(), scores.end());
    for (std::size_t k = 0; k < scores.size(); ++k) out.weights[k] = std::exp(scores[k] - top);
  }
  const double norm = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
  for (double& w : out.weights) w /= norm;

  std::vector<double> pooled, pooled_w;
  out.point = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    for (double v : samples[k]) {
      pooled.push_back(v);
      pooled_w.push_back(out.weights[k] / m);
      out.point += out.weights[k] * v / m;
    }
  }
  const double tail = (1.0 - level) / 2.0;
  out.lower = weighted_quantile(pooled, pooled_w, tail);
  out.upper = weighted_quantile(pooled, pooled_w, 1.0 - tail);
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json CbnConfig::to_json() const {
  auto pairs = [](const std::vector<std::pair<std::string, std::string>>& edges) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& [from, to] : edges) a.push_back({from, to});
    return a;
  };
  return {{"alpha", pc.alpha},
          {"min_rows_per_cell", pc.min_rows_per_cell},
          {"t0", schedule.t0},
          {"cooling", schedule.cooling},
          {"steps", schedule.steps},
          {"k", k},
          {"ess", ess},
          {"draws", draws},
          {"weighting", std::string(to_string(weighting))},
          {"level", level},
          {"seed", seed},
          {"forbidden", pairs(forbidden)},
          {"required", pairs(required)}};
}

CbnConfig CbnConfig::from_json(const nlohmann::json& doc) {
  CbnConfig c;
  try {
    if (!doc.is_object()) throw ParseError("structure config must be an object");
    c.pc.alpha = doc.value("alpha", c.pc.alpha);
    c.pc.min_rows_per_cell = doc.value("min_rows_per_cell", c.pc.min_rows_per_cell);
    c.schedule.t0 = doc.value("t0", c.schedule.t0);
    c.schedule.cooling = doc.value("cooling", c.schedule.cooling);
    c.schedule.steps = doc.value("steps", c.schedule.steps);
    c.k = doc.value("k", c.k);
    c.ess = doc.value("ess", c.ess);
    c.draws = doc.value("draws", c.draws);
    if (doc.contains("weighting")) c.weighting = parse_weighting(doc["weighting"].get<std::string>());
    c.level = doc.value("level", c.level);
    c.seed = doc.value("seed", c.seed);
    for (const char* key : {"forbidden", "required"}) {
      if (!doc.contains(key)) continue;
      auto& dst = std::string_view(key) == "forbidden" ? c.forbidden : c.required;
      for (const auto& e : doc[key]) {
        dst.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("structure config: ") + e.what());
  }
  c.schedule.validate();
  if (c.k < 1) throw ParseError("structure config: k must be >= 1");
  if (c.draws < 1) throw ParseError("structure config: draws must be >= 1");
  return c;
}

LearnedStructure learn_structure(const DiscreteData& data, const CbnConfig& cfg) {
  LearnedStructure out;
  out.pc = pc_learn(data, cfg.pc);
  try {
    out.init = pdag_to_dag(out.pc.pdag);
  } catch (const Error&) {
    // Finite-sample PC output can be inconsistent; keep only its directed part.
    Pdag directed_only = out.pc.pdag;
    directed_only.undirected.clear();
    try {
      out.init = pdag_to_dag(directed_only);
    } catch (const Error&) {
      out.init = Dag(data.names());
    }
  }
  Knowledge knowledge;
  for (const auto& [a, b] : cfg.forbidden) knowledge.forbidden.emplace_back(data.index_of(a), data.index_of(b));
  for (const auto& [a, b] : cfg.required) knowledge.required.emplace_back(data.index_of(a), data.index_of(b));
  Dag init = out.init;
  for (auto [a, b] : init.edges()) {
    if (knowledge.is_forbidden(a, b)) init.remove_edge(a, b);
  }
  BdeuScorer scorer(data, cfg.ess);
  out.networks = sa_search(scorer, init, cfg.k, cfg.schedule, cfg.seed, knowledge);
  return out;
}

AceEstimate cbn_estimate(const DiscreteData& data, std::span<const ScoredNetwork> networks,
                         const CausalQuery& q, const CbnConfig& cfg) {
  if (networks.empty()) throw Error("cbn_estimate: no networks");
  std::vector<double> scores;
  std::vector<std::vector<double>> samples;
  std::vector<InterventionalRisks> risks;
  for (std::size_t k = 0; k < networks.size(); ++k) {
    scores.push_back(networks[k].score);
    samples.push_back(posterior_ace_samples(data, networks[k].dag, q, cfg.draws,
                                            substream_seed(cfg.seed, 1000 + k), cfg.ess));
    const CptSet fitted = fit_cpts(data, networks[k].dag, cfg.ess);
    AceEvaluator eval(networks[k].dag, fitted, q);
    risks.push_back(eval.evaluate(fitted));
  }
  const AveragedAce avg = model_average_ace(scores, samples, cfg.weighting, cfg.level);
  AceEstimate est;
  est.treated = data.variables[q.treatment].levels[q.treated];
  est.control = data.variables[q.treatment].levels[q.control];
  est.method = Method::kCbn;
  est.point = avg.point;
  est.lower = avg.lower;
  est.upper = avg.upper;
  est.n_used = data.num_rows();
  for (std::size_t k = 0; k < risks.size(); ++k) {
    est.risk_treated += avg.weights[k] * risks[k].treated;
    est.risk_control += avg.weights[k] * risks[k].control;
  }
  return est;
}

}  // namespace causeway
