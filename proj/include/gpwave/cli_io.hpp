#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "gpwave/errors.hpp"
#include "gpwave/experiments.hpp"

namespace gpwave {

// Config errors carry the offending key ("family.width" for nested keys).
class ConfigError : public Error {
 public:
  ConfigError(ErrorCode code, std::string key, const std::string& what)
      : Error(code, what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Commands: simulate, decay, compare-wave, compare-leps, soliton, lp-check,
// sweep.
const std::vector<std::string>& command_names();

// Documented defaults of one command, in canonical key order. A null value
// marks a required key.
nlohmann::ordered_json command_defaults(const std::string& command);

struct RunConfig {
  std::string command;
  nlohmann::ordered_json values;  // canonical: every key of the command, defaults filled
  std::string output_dir = "out";

  std::string canonical() const { return values.dump(); }
  // FNV-1a 64 of canonical(), 16 hex digits.
  std::string hash() const;

  template <class T>
  T get(const std::string& key) const {
    return values.at(key).get<T>();
  }
  bool has(const std::string& key) const { return values.contains(key); }
  GridSpec grid() const;
  DataFamily family() const;
  std::vector<double> eps() const { return get<std::vector<double>>("eps"); }
};

// `overrides` (from flags) replace keys of `doc`; nested objects merge.
// "output_dir" is read from either but is not part of the canonical form.
RunConfig parse_config(const nlohmann::ordered_json& doc,
                       const nlohmann::ordered_json& overrides =
                           nlohmann::ordered_json::object());
RunConfig parse_config_file(const std::string& path,
                            const nlohmann::ordered_json& overrides =
                                nlohmann::ordered_json::object());

ExperimentReport run_experiment(const RunConfig& config,
                                const std::filesystem::path& snapshot_dir = {});

struct RunOutcome {
  int status = 0;  // 0 all verdicts pass, 1 a verdict failed, 2 error
  std::filesystem::path dir;
  std::vector<std::string> failures;
};

// Writes output_dir/<command>-<hash>/ with manifest.json, series.csv,
// report.json, plots/*.svg and snapshots/*.gpwf. Only manifest.json holds
// wall-clock data.
RunOutcome run_command(const RunConfig& config);

// The config stored in a manifest written by run_command.
RunConfig config_from_manifest(const std::string& path,
                               const nlohmann::ordered_json& overrides =
                                   nlohmann::ordered_json::object());

std::string code_version();

}  // namespace gpwave
