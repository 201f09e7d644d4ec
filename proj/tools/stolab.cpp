#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stolab/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Self-consistent transfer operators and coupled circle maps"};
  app.set_version_flag("--version", stolab::library_version());
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the experiment described by a JSON config");
  std::string config_path;
  std::string output_dir;
  run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("--output-dir", output_dir, "write artifacts here instead of the config's output_dir");

  auto* list = app.add_subcommand("list", "list the available experiments");
  bool as_json = false;
  list->add_flag("--json", as_json, "print the listing as a JSON array");

  CLI11_PARSE(app, argc, argv);

  if (*list) {
    if (as_json) std::cout << stolab::experiments_json().dump(2) << '\n';
    else std::cout << stolab::experiments_table();
    return 0;
  }

  std::optional<std::filesystem::path> override_dir;
  if (!output_dir.empty()) override_dir = output_dir;
  nlohmann::json err;
  const int status = stolab::run_config_file(config_path, override_dir, &err);
  if (status != 0) std::cerr << err.dump(2) << '\n';
  return status;
}
