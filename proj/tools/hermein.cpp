// Batch experiment driver: `hermein run <config>` executes one named
// experiment and writes a machine-readable report, `hermein list` prints the
// experiment names, `hermein check` runs the full acceptance suite.

#include <iostream>

#include <CLI11.hpp>

#include "hermein/acceptance.hpp"
#include "hermein/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical bridge between bundle metrics and section-space metrics"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run the experiment named by a config file");
  run_cmd->add_option("config", config_path, "path to a key = value config file")
      ->required();

  auto* list_cmd = app.add_subcommand("list", "print the experiment names");
  auto* check_cmd = app.add_subcommand("check", "run the acceptance suite");

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) return hermein::run(config_path);
  if (list_cmd->parsed()) {
    for (const auto& [name, exp] : hermein::experiment_names()) std::cout << name << "\n";
    return 0;
  }
  if (check_cmd->parsed())
    return hermein::report_acceptance(std::cout) == 0 ? 0 : 1;
  return 0;
}
