#pragma once

// Config-driven experiment runner behind the command line tool. A config is a
// JSON object; every run writes manifest.json, trace.csv and report.json into
// its output directory. The manifest is itself a valid config, so a run can
// be repeated from its manifest alone.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stolab/error.hpp"

namespace stolab {

struct ExperimentInfo {
  std::string name;
  std::string description;
  std::vector<std::string> required;  // dotted config keys
};

const std::vector<ExperimentInfo>& list_experiments();
nlohmann::json experiments_json();
std::string experiments_table();

std::string library_version();

/// Config error that names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(ErrorKind::Config, what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Runs one experiment and writes its artifacts; returns the report.
/// Throws on invalid configs and numerical failures.
nlohmann::json run_experiment(const nlohmann::json& config, const std::filesystem::path& output_dir);

/// Loads a config file, resolves the output directory (override, then the
/// config's output_dir, then the current directory) and runs it. On failure
/// writes error.json and returns a nonzero status; the error JSON is also
/// returned through `error` when given.
int run_config_file(const std::filesystem::path& config_path,
                    const std::optional<std::filesystem::path>& output_override,
                    nlohmann::json* error = nullptr);

nlohmann::json error_json(const std::exception& e);

}  // namespace stolab
