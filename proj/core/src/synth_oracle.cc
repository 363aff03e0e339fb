#include "causeway/synth_oracle.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "causeway/error.h"
#include "causeway/parallel.h"
#include "causeway/rng.h"

namespace causeway {
namespace {

constexpr std::size_t kSampleBlock = 8192;

Cpt make_cpt(const Dag& g, const std::vector<DiscreteVariable>& vars, int node,
             std::vector<std::vector<double>> rows) {
  Cpt t;
  t.parents = g.parents(node);
  for (int p : t.parents) t.parent_cards.push_back(static_cast<int>(vars[p].levels.size()));
  t.cardinality = static_cast<int>(vars[node].levels.size());
  for (auto& r : rows) t.probs.insert(t.probs.end(), r.begin(), r.end());
  return t;
}

GroundTruth build_road_truth(bool randomized) {
  std::vector<DiscreteVariable> vars = {
      {"Urban", {"0", "1"}},
      {"ADT", {"0", "1"}},
      {"Age", {"0", "1", "2"}},
      {"PMR", {"Low", "Med", "High"}},
      {"Safety", {"0", "1"}},
  };
  std::vector<std::string> names;
  for (const auto& v : vars) names.push_back(v.name);
  std::vector<Edge> edges = {{0, 1}, {0, 4}, {1, 4}, {3, 4}};
  if (!randomized) {
    edges.push_back({1, 3});
    edges.push_back({2, 3});
  }
  Dag g(names, edges);

  CptSet cpts;
  cpts.variables = vars;
  cpts.tables.push_back(make_cpt(g, vars, 0, {{0.55, 0.45}}));
  cpts.tables.push_back(make_cpt(g, vars, 1, {{0.7, 0.3}, {0.25, 0.75}}));
  cpts.tables.push_back(make_cpt(g, vars, 2, {{0.3, 0.35, 0.35}}));
  if (randomized) {
    cpts.tables.push_back(make_cpt(g, vars, 3, {{0.42, 0.35, 0.23}}));
  } else {
    // rows: (ADT, Age) with Age fastest
    cpts.tables.push_back(make_cpt(g, vars, 3,
                                   {{0.10, 0.35, 0.55},
                                    {0.30, 0.45, 0.25},
                                    {0.50, 0.35, 0.15},
                                    {0.25, 0.40, 0.35},
                                    {0.55, 0.35, 0.10},
                                    {0.75, 0.20, 0.05}}));
  }
  // rows: (Urban, ADT, PMR) with PMR fastest; additive on the logit scale.
  const double risk[] = {0.4750, 0.2432, 0.0832, 0.8176, 0.6142, 0.3100,
                         0.6225, 0.3694, 0.1419, 0.8909, 0.7436, 0.4502};
  std::vector<std::vector<double>> safety;
  for (double r : risk) safety.push_back({1.0 - r, r});
  cpts.tables.push_back(make_cpt(g, vars, 4, std::move(safety)));

  GroundTruth gt{std::move(g), std::move(cpts), "PMR", "Safety", 20240917};
  gt.validate();
  return gt;
}

}  // namespace

void GroundTruth::validate() const {
  cpts.validate(graph, 1e-12);
  graph.topological_order();
  const int t = graph.index_of(treatment);
  const int s = graph.index_of(outcome);
  if (t == s) throw Error("ground truth: treatment and outcome must differ");
}

Schema GroundTruth::schema() const {
  std::vector<VariableSpec> specs;
  for (std::size_t v = 0; v < cpts.variables.size(); ++v) {
    VariableSpec spec;
    spec.name = cpts.variables[v].name;
    spec.kind = VariableKind::kCategorical;
    spec.levels = cpts.variables[v].levels;
    spec.role = spec.name == treatment ? VariableRole::kTreatment
                : spec.name == outcome ? VariableRole::kOutcome
                                       : VariableRole::kCovariate;
    specs.push_back(std::move(spec));
  }
  return Schema(std::move(specs));
}

nlohmann::json GroundTruth::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t v = 0; v < cpts.tables.size(); ++v) {
    const Cpt& t = cpts.tables[v];
    std::vector<std::string> parent_names;
    for (int p : t.parents) parent_names.push_back(graph.name(p));
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t j = 0; j < t.num_configs(); ++j) {
      auto r = t.row(j);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    nodes.push_back({{"name", cpts.variables[v].name},
                     {"levels", cpts.variables[v].levels},
                     {"parents", parent_names},
                     {"cpt", std::move(rows)}});
  }
  return nlohmann::json{
      {"nodes", std::move(nodes)}, {"treatment", treatment}, {"outcome", outcome}, {"seed", seed}};
}

GroundTruth GroundTruth::from_json(const nlohmann::json& doc) {
  try {
    const auto& nodes = doc.at("nodes");
    std::vector<std::string> names;
    std::vector<DiscreteVariable> vars;
    for (const auto& n : nodes) {
      names.push_back(n.at("name").get<std::string>());
      vars.push_back({names.back(), n.at("levels").get<std::vector<std::string>>()});
    }
    Dag g(names);
    for (std::size_t v = 0; v < nodes.size(); ++v) {
      for (const auto& p : nodes[v].at("parents")) {
        g.add_edge(g.index_of(p.get<std::string>()), static_cast<int>(v));
      }
    }
    CptSet cpts;
    cpts.variables = vars;
    for (std::size_t v = 0; v < nodes.size(); ++v) {
      // Parent order in the document may differ from ascending node order.
      const auto listed = nodes[v].at("parents").get<std::vector<std::string>>();
      const auto rows = nodes[v].at("cpt").get<std::vector<std::vector<double>>>();
      Cpt t = make_cpt(g, vars, static_cast<int>(v), {});
      const std::size_t q = t.num_configs();
      if (rows.size() != q) {
        throw ParseError("ground truth: node '" + names[v] + "' needs " + std::to_string(q) +
                         " cpt rows");
      }
      std::vector<int> listed_idx;
      std::vector<int> listed_cards;
      for (const auto& p : listed) {
        listed_idx.push_back(g.index_of(p));
        listed_cards.push_back(static_cast<int>(vars[listed_idx.back()].levels.size()));
      }
      t.probs.assign(q * t.cardinality, 0.0);
      std::vector<int> codes(listed.size());
      for (std::size_t j = 0; j < q; ++j) {
        // decode j in the listed order (last fastest)
        std::size_t rem = j;
        for (std::size_t i = listed.size(); i-- > 0;) {
          codes[i] = static_cast<int>(rem % listed_cards[i]);
          rem /= listed_cards[i];
        }
        std::vector<int> assignment(names.size(), 0);
        for (std::size_t i = 0; i < listed.size(); ++i) assignment[listed_idx[i]] = codes[i];
        const std::size_t target = t.config_of(assignment);
        if (rows[j].size() != static_cast<std::size_t>(t.cardinality)) {
          throw ParseError("ground truth: cpt row width mismatch for '" + names[v] + "'");
        }
        std::copy(rows[j].begin(), rows[j].end(), t.probs.begin() + target * t.cardinality);
      }
      cpts.tables.push_back(std::move(t));
    }
    GroundTruth gt{std::move(g), std::move(cpts), doc.at("treatment").get<std::string>(),
                   doc.at("outcome").get<std::string>(), doc.value("seed", std::uint64_t{0})};
    gt.validate();
    return gt;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("ground truth json: ") + e.what());
  }
}

GroundTruth GroundTruth::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground truth '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("ground truth '" + path.string() + "': " + e.what());
  }
  return from_json(doc);
}

int JointTable::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].name == name) return static_cast<int>(i);
  }
  throw Error("joint table: unknown variable '" + std::string(name) + "'");
}

void JointTable::decode(std::size_t state, std::span<int> codes) const {
  for (std::size_t i = cards.size(); i-- > 0;) {
    codes[i] = static_cast<int>(state % cards[i]);
    state /= cards[i];
  }
}

Dataset sample_dataset(const GroundTruth& gt, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error("sample_dataset: n must be >= 1");
  gt.validate();
  const auto order = gt.graph.topological_order();
  const std::size_t num_vars = gt.graph.num_nodes();
  std::vector<std::vector<double>> columns(num_vars, std::vector<double>(n));
  const std::size_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
  parallel_for(blocks, [&](std::size_t b) {
    Rng rng = make_rng(seed, b);
    std::vector<int> assignment(num_vars);
    const std::size_t end = std::min(n, (b + 1) * kSampleBlock);
    for (std::size_t r = b * kSampleBlock; r < end; ++r) {
      for (int v : order) {
        const Cpt& t = gt.cpts.tables[v];
        auto row = t.row(t.config_of(assignment));
        const double u = uniform01(rng);
        double acc = 0;
        int k = 0;
        for (; k + 1 < t.cardinality; ++k) {
          acc += row[k];
          if (u < acc) break;
        }
        // Zero-probability trailing levels are never drawn.
        while (k > 0 && row[k] == 0.0) --k;
        assignment[v] = k;
      }
      for (std::size_t v = 0; v < num_vars; ++v) columns[v][r] = assignment[v];
    }
  });
  return Dataset(gt.schema(), std::move(columns));
}

JointTable enumerate_joint(const Dag& graph, const CptSet& cpts) {
  cpts.validate(graph, 1e-9);
  JointTable jt;
  jt.variables = cpts.variables;
  std::size_t states = 1;
  for (const auto& t : cpts.tables) {
    jt.cards.push_back(t.cardinality);
    if (states > kMaxEnumerationStates / static_cast<std::size_t>(t.cardinality)) {
      throw Error("enumerate_joint: state space exceeds " +
                  std::to_string(kMaxEnumerationStates));
    }
    states *= static_cast<std::size_t>(t.cardinality);
  }
  jt.probs.resize(states);
  std::vector<int> codes(jt.cards.size(), 0);
  for (std::size_t s = 0; s < states; ++s) {
    double p = 1.0;
    for (std::size_t v = 0; v < cpts.tables.size() && p != 0.0; ++v) {
      p *= cpts.tables[v].prob(codes, static_cast<int>(v));
    }
    jt.probs[s] = p;
    // increment, last variable fastest
    for (std::size_t i = codes.size(); i-- > 0;) {
      if (++codes[i] < jt.cards[i]) break;
      codes[i] = 0;
    }
  }
  return jt;
}

double oracle_marginal(const JointTable& joint, CodeAssignment query,
                       std::span<const CodeAssignment> evidence) {
  const int n = static_cast<int>(joint.cards.size());
  auto check = [&](const CodeAssignment& a) {
    if (a.first < 0 || a.first >= n || a.second < 0 || a.second >= joint.cards[a.first]) {
      throw Error("oracle_marginal: assignment out of range");
    }
  };
  check(query);
  for (const auto& e : evidence) check(e);
  std::vector<int> codes(n);
  double mass = 0;
  double hit = 0;
  for (std::size_t s = 0; s < joint.num_states(); ++s) {
    joint.decode(s, codes);
    bool match = true;
    for (const auto& [v, k] : evidence) {
      if (codes[v] != k) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    mass += joint.probs[s];
    if (codes[query.first] == query.second) hit += joint.probs[s];
  }
  if (!(mass > 0)) throw Error("oracle_marginal: evidence has zero probability");
  return hit / mass;
}

double oracle_marginal(const JointTable& joint, std::string_view variable, std::string_view level,
                       std::span<const std::pair<std::string, std::string>> evidence) {
  auto code = [&](std::string_view var, std::string_view lvl) {
    const int v = joint.index_of(var);
    const auto& levels = joint.variables[v].levels;
    auto it = std::find(levels.begin(), levels.end(), lvl);
    if (it == levels.end()) {
      throw Error("oracle_marginal: '" + std::string(lvl) + "' is not a level of '" +
                  std::string(var) + "'");
    }
    return CodeAssignment{v, static_cast<int>(it - levels.begin())};
  };
  std::vector<CodeAssignment> ev;
  for (const auto& [var, lvl] : evidence) ev.push_back(code(var, lvl));
  return oracle_marginal(joint, code(variable, level), ev);
}

double oracle_interventional_risk(const GroundTruth& gt, std::string_view treatment_level) {
  const int t = gt.graph.index_of(gt.treatment);
  const int s = gt.graph.index_of(gt.outcome);
  const int t_code = gt.cpts.level_index(t, treatment_level);
  const int s_code = gt.cpts.level_index(s, "1");
  const std::size_t n = gt.cpts.tables.size();
  std::vector<int> cards;
  std::size_t states = 1;
  for (const auto& tab : gt.cpts.tables) {
    cards.push_back(tab.cardinality);
    states *= static_cast<std::size_t>(tab.cardinality);
  }
  if (states > kMaxEnumerationStates) throw Error("oracle: state space too large");
  std::vector<int> codes(n, 0);
  double risk = 0;
  for (std::size_t st = 0; st < states; ++st) {
    if (codes[t] == t_code && codes[s] == s_code) {
      double p = 1.0;
      for (std::size_t v = 0; v < n; ++v) {
        if (static_cast<int>(v) == t) continue;  // truncated factorization
        p *= gt.cpts.tables[v].prob(codes, static_cast<int>(v));
      }
      risk += p;
    }
    for (std::size_t i = n; i-- > 0;) {
      if (++codes[i] < cards[i]) break;
      codes[i] = 0;
    }
  }
  return risk;
}

double oracle_do_ace(const GroundTruth& gt, std::string_view treated, std::string_view control) {
  const double num = oracle_interventional_risk(gt, treated);
  const double den = oracle_interventional_risk(gt, control);
  if (!(den > 0)) throw Error("oracle_do_ace: control risk is zero");
  if (treated == control) return 1.0;
  return num / den;
}

GroundTruth default_ground_truth() { return build_road_truth(false); }

GroundTruth randomized_ground_truth() { return build_road_truth(true); }

}  // namespace causeway
