#include "causeway/study.h"

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <boost/version.hpp>
#include <openssl/evp.h>

#include "causeway/error.h"
#include "causeway/render.h"
#include "causeway/synth_oracle.h"

namespace causeway {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string dump(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

StudyConfig StudyConfig::from_json(const nlohmann::json& doc, const fs::path& base_dir) {
  StudyConfig c;
  try {
    if (!doc.is_object()) throw ParseError("study config must be a JSON object");
    for (const char* key : {"data", "schema", "comparisons", "methods", "seed"}) {
      if (!doc.contains(key)) throw ParseError(std::string("study config: missing '") + key + "'");
    }
    c.data = resolve(base_dir, doc["data"].get<std::string>());
    c.schema = resolve(base_dir, doc["schema"].get<std::string>());
    c.output = resolve(base_dir, doc.value("output", std::string("out")));
    for (const auto& pair : doc["comparisons"]) {
      if (!pair.is_array() || pair.size() != 2) {
        throw ParseError("study config: each comparison is [treated, control]");
      }
      c.comparisons.push_back({pair[0].get<std::string>(), pair[1].get<std::string>()});
    }
    for (const auto& m : doc["methods"]) c.methods.push_back(parse_method(m.get<std::string>()));
    c.seed = doc["seed"].get<std::uint64_t>();

    if (doc.contains("boosting")) {
      const auto& b = doc["boosting"];
      if (b.contains("propensity") || b.contains("outcome")) {
        if (b.contains("propensity")) c.po.propensity = BoostConfig::from_json(b["propensity"]);
        if (b.contains("outcome")) c.po.outcome = BoostConfig::from_json(b["outcome"]);
      } else {
        c.po.propensity = c.po.outcome = BoostConfig::from_json(b);
      }
    }
    c.po.caliper = doc.value("caliper", c.po.caliper);
    c.po.balance.permutations = doc.value("balance_permutations", c.po.balance.permutations);
    c.po.bootstrap = doc.value("bootstrap", c.po.bootstrap);
    c.po.level = doc.value("level", c.po.level);
    c.po.seed = c.seed;
    c.po.balance.seed = substream_seed(c.seed, 0xBA1);

    nlohmann::json structure = doc.value("structure", nlohmann::json::object());
    if (!structure.contains("seed")) structure["seed"] = c.seed;
    if (doc.contains("draws")) structure["draws"] = doc["draws"];
    if (!structure.contains("level")) structure["level"] = c.po.level;
    c.cbn = CbnConfig::from_json(structure);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("study config: ") + e.what());
  }
  if (c.comparisons.empty()) throw ParseError("study config: no comparisons");
  if (c.methods.empty()) throw ParseError("study config: no methods");
  if (c.po.bootstrap < 2) throw ParseError("study config: bootstrap must be >= 2");
  if (!(c.po.caliper > 0)) throw ParseError("study config: caliper must be > 0");
  return c;
}

StudyConfig StudyConfig::load(const fs::path& path) {
  const std::string text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("study config '" + path.string() + "': " + e.what());
  }
  return from_json(doc, path.parent_path());
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string pair_slug(const Comparison& c) {
  std::string s = c.treated + "_vs_" + c.control;
  for (char& ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-') ch = '_';
  }
  return s;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const fs::path& truth, std::size_t n, std::uint64_t seed, const fs::path& out_dir,
                 std::ostream& log) {
  try {
    if (n == 0) throw Error("simulate: n must be >= 1");
    const GroundTruth gt = GroundTruth::load(truth);
    const Dataset data = sample_dataset(gt, n, seed);
    fs::create_directories(out_dir);
    write_csv(data, out_dir / "data.csv");
    gt.schema().save(out_dir / "schema.json");

    const JointTable joint = enumerate_joint(gt);
    const auto& levels = gt.cpts.variables[gt.graph.index_of(gt.treatment)].levels;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& t : levels) {
      for (const auto& c : levels) {
        if (t == c) continue;
        const double rt = oracle_interventional_risk(gt, t);
        const double rc = oracle_interventional_risk(gt, c);
        const std::pair<std::string, std::string> et[] = {{gt.treatment, t}};
        const std::pair<std::string, std::string> ec[] = {{gt.treatment, c}};
        const double ot = oracle_marginal(joint, gt.outcome, "1", et);
        const double oc = oracle_marginal(joint, gt.outcome, "1", ec);
        pairs.push_back({{"treated", t},
                         {"control", c},
                         {"risk_treated", rt},
                         {"risk_control", rc},
                         {"risk_ratio", rt / rc},
                         {"observational_risk_ratio", ot / oc}});
      }
    }
    const nlohmann::json oracle = {{"treatment", gt.treatment}, {"outcome", gt.outcome},
                                   {"n", n},                    {"seed", seed},
                                   {"pairs", pairs}};
    write_file(out_dir / "oracle.json", dump(oracle));
    log << "wrote " << n << " rows to " << (out_dir / "data.csv").string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUnusable;
  }
}

namespace {

nlohmann::json pc_json(const PcResult& pc) {
  nlohmann::json directed = nlohmann::json::array(), undirected = nlohmann::json::array();
  for (auto [a, b] : pc.pdag.directed) directed.push_back({pc.pdag.nodes[a], pc.pdag.nodes[b]});
  for (auto [a, b] : pc.pdag.undirected) {
    undirected.push_back({pc.pdag.nodes[a], pc.pdag.nodes[b]});
  }
  nlohmann::json out = {{"directed", directed},
                        {"undirected", undirected},
                        {"tests_run", pc.tests_run},
                        {"tests_skipped", pc.tests_skipped}};
  if (!pc.warning.empty()) out["warning"] = pc.warning;
  return out;
}

nlohmann::json networks_json(const std::vector<ScoredNetwork>& networks) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < networks.size(); ++i) {
    nlohmann::json n = networks[i].to_json();
    n["rank"] = i + 1;
    out.push_back(std::move(n));
  }
  return out;
}

void write_dags(const std::vector<ScoredNetwork>& networks, const fs::path& out_dir) {
  for (std::size_t i = 0; i < networks.size(); ++i) {
    write_file(out_dir / ("dag_" + std::to_string(i + 1) + ".dot"),
               networks[i].dag.to_dot("dag_" + std::to_string(i + 1)));
  }
}

std::string library_version_boost() {
  return std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) +
         "." + std::to_string(BOOST_VERSION % 100);
}

}  // namespace

int cmd_estimate(const fs::path& config_path, std::ostream& log) {
  StudyConfig cfg;
  Dataset raw;
  std::string config_text, data_text;
  try {
    cfg = StudyConfig::load(config_path);
    config_text = read_file(config_path);
    data_text = read_file(cfg.data);
    const Schema schema = Schema::load(cfg.schema);
    LoadResult loaded = load_csv(cfg.data, schema);
    if (loaded.dropped_rows > 0) {
      log << "note: dropped " << loaded.dropped_rows << " rows with missing cells\n";
    }
    raw = std::move(loaded.dataset);
    if (raw.num_rows() == 0) throw Error("data file has no complete rows");
    fs::create_directories(cfg.output);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUnusable;
  }

  const Schema& schema = raw.schema();
  const std::vector<std::string> covariates = schema.covariate_names();
  const std::string treatment = schema[schema.treatment_index()].name;
  const std::string outcome = schema[schema.outcome_index()].name;
  const bool want_cbn = std::count(cfg.methods.begin(), cfg.methods.end(), Method::kCbn) > 0;
  const bool want_po = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                   [](Method m) { return m != Method::kCbn; });

  nlohmann::json bundle;
  std::optional<DiscreteData> discrete;
  std::optional<LearnedStructure> learned;
  std::string cbn_error;
  if (want_cbn) {
    try {
      discrete = DiscreteData::from_dataset(discretize_all(raw));
      learned = learn_structure(*discrete, cfg.cbn);
      bundle["structure"] = {{"pc", pc_json(learned->pc)}, {"networks", networks_json(learned->networks)}};
    } catch (const std::exception& e) {
      cbn_error = e.what();
      log << "structure learning failed: " << cbn_error << "\n";
    }
  }

  std::size_t requested = 0, delivered = 0;
  std::vector<AceEstimate> all;
  nlohmann::json comparisons = nlohmann::json::array();
  for (std::size_t ci = 0; ci < cfg.comparisons.size(); ++ci) {
    const Comparison& comp = cfg.comparisons[ci];
    nlohmann::json entry = {{"treated", comp.treated}, {"control", comp.control}};
    nlohmann::json estimates = nlohmann::json::array(), failures = nlohmann::json::array();

    std::optional<TreatmentPair> pair;
    std::string pair_error, po_error;
    try {
      pair = split_treatment_pair(raw, comp.treated, comp.control);
      entry["n"] = pair->indicator.size();
      entry["n_treated"] = pair->num_treated();
      entry["n_control"] = pair->num_control();
      try {
        entry["naive_risk_ratio"] = naive_risk_ratio(*pair).ratio;
      } catch (const Error&) {
        entry["naive_risk_ratio"] = nullptr;
      }
    } catch (const std::exception& e) {
      pair_error = e.what();
    }

    PoConfig po = cfg.po;
    po.seed = substream_seed(cfg.seed, 100 + ci);
    po.balance.seed = substream_seed(cfg.seed, 200 + ci);
    std::optional<PropensityFit> fit;
    if (want_po && pair) {
      try {
        fit = fit_propensity(*pair, covariates, po.propensity);
        const auto balance = balance_table(*pair, *fit, po.balance);
        entry["balance"] = to_json(balance);
        entry["propensity_stage"] = fit->selected_stage;
        if (fit->balance_undefined) entry["balance_warning"] = "every covariate is constant";
        write_file(cfg.output / ("balance_" + pair_slug(comp) + ".svg"),
                   render_balance_svg(balance, po.balance.threshold,
                                      comp.treated + " vs " + comp.control));
      } catch (const std::exception& e) {
        po_error = e.what();
      }
    }

    for (Method method : cfg.methods) {
      ++requested;
      try {
        AceEstimate est;
        if (method == Method::kCbn) {
          if (!learned) throw Error("network unavailable: " + cbn_error);
          const CausalQuery q =
              CausalQuery::resolve(discrete->variables, treatment, comp.treated, comp.control, outcome);
          CbnConfig cc = cfg.cbn;
          cc.seed = substream_seed(cfg.cbn.seed, 300 + ci);
          est = cbn_estimate(*discrete, learned->networks, q, cc);
        } else {
          if (!pair) throw Error(pair_error);
          if (!fit) throw Error("propensity model failed: " + po_error);
          est = estimate_po_method(*pair, covariates, method, po, *fit);
        }
        estimates.push_back(est.to_json());
        all.push_back(std::move(est));
        ++delivered;
      } catch (const std::exception& e) {
        failures.push_back({{"method", std::string(to_string(method))}, {"error", e.what()}});
        log << comp.treated << " vs " << comp.control << " " << to_string(method)
            << " failed: " << e.what() << "\n";
      }
    }
    entry["estimates"] = estimates;
    entry["failures"] = failures;
    comparisons.push_back(std::move(entry));
  }
  bundle["comparisons"] = comparisons;

  nlohmann::json methods = nlohmann::json::array();
  for (Method m : cfg.methods) methods.push_back(std::string(to_string(m)));
  bundle["methods"] = methods;
  bundle["provenance"] = {{"tool", "causeway"},
                          {"version", "0.1.0"},
                          {"seed", cfg.seed},
                          {"config_sha256", sha256_hex(config_text)},
                          {"data_sha256", sha256_hex(data_text)},
                          {"input_sha256", sha256_hex(config_text + data_text)},
                          {"libraries",
                           {{"boost", library_version_boost()},
                            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
                          {"settings",
                           {{"propensity", cfg.po.propensity.to_json()},
                            {"outcome", cfg.po.outcome.to_json()},
                            {"caliper", cfg.po.caliper},
                            {"bootstrap", cfg.po.bootstrap},
                            {"level", cfg.po.level},
                            {"balance_permutations", cfg.po.balance.permutations},
                            {"structure", cfg.cbn.to_json()}}}};
  const int code = delivered == requested ? kExitOk : delivered > 0 ? kExitPartial : kExitUnusable;
  bundle["status"] = code == kExitOk ? "ok" : code == kExitPartial ? "partial" : "failed";

  try {
    write_file(cfg.output / "bundle.json", dump(bundle));
    if (!all.empty()) write_file(cfg.output / "ci_overlap.svg", render_ci_overlap_svg(all));
    if (learned) write_dags(learned->networks, cfg.output);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUnusable;
  }
  log << delivered << "/" << requested << " estimates written to " << cfg.output.string() << "\n";
  return code;
}

int cmd_learn_structure(const fs::path& data, const fs::path& schema_path, std::size_t k,
                        const fs::path& out_dir, std::ostream& log, const CbnConfig& base) {
  try {
    if (k < 1) throw Error("learn-structure: k must be >= 1");
    const Schema schema = Schema::load(schema_path);
    const Dataset raw = load_csv(data, schema).dataset;
    const DiscreteData discrete = DiscreteData::from_dataset(discretize_all(raw));
    CbnConfig cfg = base;
    cfg.k = k;
    const LearnedStructure learned = learn_structure(discrete, cfg);
    fs::create_directories(out_dir);
    write_file(out_dir / "networks.json",
               dump({{"pc", pc_json(learned.pc)}, {"networks", networks_json(learned.networks)}}));
    write_dags(learned.networks, out_dir);
    if (!learned.pc.warning.empty()) log << "warning: " << learned.pc.warning << "\n";
    log << learned.networks.size() << " networks written to " << out_dir.string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUnusable;
  }
}

int cmd_render(const fs::path& bundle_path, const fs::path& out_dir, std::ostream& log) {
  try {
    nlohmann::json bundle;
    try {
      bundle = nlohmann::json::parse(read_file(bundle_path));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("bundle '" + bundle_path.string() + "': " + e.what());
    }
    fs::create_directories(out_dir);
    std::vector<AceEstimate> all;
    for (const auto& comp : bundle.at("comparisons")) {
      for (const auto& e : comp.at("estimates")) all.push_back(AceEstimate::from_json(e));
      if (comp.contains("balance")) {
        const Comparison c{comp.at("treated").get<std::string>(), comp.at("control").get<std::string>()};
        write_file(out_dir / ("balance_" + pair_slug(c) + ".svg"),
                   render_balance_svg(balance_from_json(comp["balance"]), 0.05,
                                      c.treated + " vs " + c.control));
      }
    }
    write_file(out_dir / "ci_overlap.svg", render_ci_overlap_svg(all));
    return kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUnusable;
  }
}

}  // namespace causeway
