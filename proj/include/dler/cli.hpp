#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "dler/trainer.hpp"

namespace dler {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitRuntime = 3,
  kExitCheckFailed = 4,
};

/// Runs one command line; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Plot-ready CSV for a metrics series.
std::string metrics_csv(const std::vector<MetricsRecord>& records);

/// Parses metrics JSONL. Errors carry "path:line:" prefixes.
std::vector<MetricsRecord> read_metrics_jsonl(const std::string& text, const std::string& path);

}  // namespace dler
