#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "zgs/evaluate.hpp"
#include "zgs/synthzoo.hpp"

namespace zgs::cli {

/// Malformed or schema-violating configuration (usage error).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  PipelineConfig pipeline;                // base strategy
  std::vector<PipelineConfig> strategies; // resolved; the base alone when none are listed
  std::vector<double> ratios = {0.3, 0.5, 0.7, 1.0};
  SynthConfig synth;
  std::optional<std::string> zoo;
  std::optional<std::string> out;
};

/// Parses and validates a configuration document. Unknown keys are errors.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& file);

/// Applies a seed override to every stage.
void override_seed(RunConfig& config, std::uint64_t seed);
void override_threads(RunConfig& config, unsigned threads);

nlohmann::json to_json(const PipelineConfig& config);
nlohmann::json to_json(const SynthConfig& config);
/// Every effective setting, defaults included.
nlohmann::json to_json(const RunConfig& config);

}  // namespace zgs::cli
