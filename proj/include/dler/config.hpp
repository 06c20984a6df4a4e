#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dler/tasks.hpp"
#include "dler/trainer.hpp"

namespace dler {

struct AnalysisToggles {
  bool entropy_histogram = true;
  int entropy_bins = 20;
  bool clip_stats = true;
  bool trace_stats = true;
  int eval_samples_per_prompt = 32;
};

struct ExperimentConfig {
  std::string run_id = "run";
  std::vector<Variant> variants{Variant::Dler};
  TrainerConfig trainer;
  TaskSuiteConfig tasks;
  AnalysisToggles analysis;
  std::filesystem::path output_dir = "runs";
};

/// Every recognised key with its default value.
nlohmann::json default_config_json();

/// Sets a dotted key ("trainer.eps_high=0.28"). The value is parsed as JSON
/// when possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Strict conversion: unknown keys, wrong types and invalid values raise
/// ConfigError naming the dotted key.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);

/// Reads a config file, layers it over the defaults, applies overrides and
/// validates. `env_seed` is used when the file does not set trainer.seed.
/// Error messages carry "path:line:" prefixes where a line can be located.
ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides = {},
                                        std::optional<std::uint64_t> env_seed = std::nullopt);

nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const TrainerConfig& config);

/// One metrics line: the MetricsRecord fields plus run_id.
nlohmann::json metrics_to_json(const MetricsRecord& record, const std::string& run_id);
MetricsRecord metrics_from_json(const nlohmann::json& line);

std::string to_string(AdvantageMode mode);
AdvantageMode parse_advantage_mode(const std::string& name);

}  // namespace dler
