#ifndef CAUSEWAY_STUDY_H_
#define CAUSEWAY_STUDY_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "causeway/ace.h"
#include "causeway/cbn_inference.h"
#include "causeway/potential_outcomes.h"

namespace causeway {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUnusable = 2;

struct Comparison {
  std::string treated;
  std::string control;
};

// JSON study description. Relative paths are resolved against the directory
// of the config file.
struct StudyConfig {
  std::filesystem::path data;
  std::filesystem::path schema;
  std::vector<Comparison> comparisons;
  std::vector<Method> methods;
  PoConfig po;
  CbnConfig cbn;
  std::uint64_t seed = 0;
  std::filesystem::path output;

  // Keys: data, schema, comparisons [[treated, control], ...], methods,
  // seed, output; optional boosting {propensity, outcome} (or one object for
  // both), caliper, balance_permutations, bootstrap, level, structure
  // (network search and draws), draws.
  static StudyConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
  static StudyConfig load(const std::filesystem::path& path);
};

std::string sha256_hex(std::string_view bytes);
std::string read_file(const std::filesystem::path& path);
// Writes atomically enough for our purposes: whole content, binary mode.
void write_file(const std::filesystem::path& path, std::string_view content);

// File-name-safe "treated_vs_control".
std::string pair_slug(const Comparison& c);

// CSV + schema + oracle sidecar from a ground-truth file.
int cmd_simulate(const std::filesystem::path& truth, std::size_t n, std::uint64_t seed,
                 const std::filesystem::path& out_dir, std::ostream& log);

// Runs a study and writes bundle.json and figures into its output directory.
int cmd_estimate(const std::filesystem::path& config, std::ostream& log);

// Top-k networks for a dataset: networks.json plus dag_<rank>.dot.
int cmd_learn_structure(const std::filesystem::path& data, const std::filesystem::path& schema,
                        std::size_t k, const std::filesystem::path& out_dir, std::ostream& log,
                        const CbnConfig& cfg = {});

// Re-renders the figures of an existing bundle.
int cmd_render(const std::filesystem::path& bundle, const std::filesystem::path& out_dir,
               std::ostream& log);

}  // namespace causeway

#endif  // CAUSEWAY_STUDY_H_
