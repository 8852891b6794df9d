#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace anisolab::lab {

/// key = value configuration with [section] headers and # comments. Getters
/// record the effective value (default or supplied) so the run report can
/// echo the full resolved configuration.
class Config {
public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const;
  std::vector<int> get_int_list(const std::string& section, const std::string& key,
                                const std::vector<int>& fallback) const;

  /// Required variants throw ConfigError mentioning the key.
  std::string require_string(const std::string& section, const std::string& key) const;

  nlohmann::json echo() const;

private:
  std::map<std::string, std::string> values_;  // "section.key" -> raw text
  mutable std::map<std::string, nlohmann::json> effective_;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ExperimentInfo {
  std::string name;
  std::string description;
};

const std::vector<ExperimentInfo>& experiment_catalog();

struct RunResult {
  int exit_code = 0;  // 0 ok, 2 hypothesis violation
  nlohmann::json report;
};

/// Execute one experiment; writes report.json, field containers and scan CSVs
/// under out_dir. Throws on operational errors (unknown experiment, bad
/// config, I/O).
RunResult run_experiment(const Config& cfg, const std::filesystem::path& out_dir);

/// Full pipeline used by the CLI: parse config, run, write outputs.
/// Returns the process exit code (0 ok, 1 error printed to stderr,
/// 2 hypothesis violation).
int run_config_file(const std::string& config_path, const std::string& out_override = "");

std::string version_string();

}  // namespace anisolab::lab
