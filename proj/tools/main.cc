#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "causeway/study.h"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"causeway: causal effect estimation from observational data"};
  app.require_subcommand(1);

  std::string truth, out;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "sample a dataset and oracle sidecar from a ground truth");
  simulate->add_option("--truth", truth, "ground-truth network JSON")->required();
  simulate->add_option("--n", n, "number of rows")->required();
  simulate->add_option("--seed", seed, "sampling seed")->required();
  simulate->add_option("--out", out, "output directory")->required();

  std::string config;
  auto* estimate = app.add_subcommand("estimate", "run a study config and write a result bundle");
  estimate->add_option("--config", config, "study config JSON")->required();

  std::string data, schema, learn_out;
  std::size_t k = 10;
  auto* learn = app.add_subcommand("learn-structure", "search for the k best networks");
  learn->add_option("--data", data, "CSV data file")->required();
  learn->add_option("--schema", schema, "schema JSON")->required();
  learn->add_option("--k", k, "number of networks")->default_val(10);
  learn->add_option("--out", learn_out, "output directory")->required();

  std::string bundle, render_out;
  auto* render = app.add_subcommand("render", "draw figures from an existing bundle");
  render->add_option("--bundle", bundle, "bundle.json")->required();
  render->add_option("--out", render_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : causeway::kExitUnusable;
  }

  if (*simulate) return causeway::cmd_simulate(truth, n, seed, out, std::cerr);
  if (*estimate) return causeway::cmd_estimate(config, std::cerr);
  if (*learn) return causeway::cmd_learn_structure(data, schema, k, learn_out, std::cerr);
  if (*render) return causeway::cmd_render(bundle, render_out, std::cerr);
  return causeway::kExitUnusable;
}
