#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "llmforest_cli/run_config.hpp"

namespace llmforest::cli {

/// Writes masked.csv, truth.csv, split.json, schema.json and config.mask.json.
void cmd_mask(const RunConfig& config);

/// Reads masked.csv and truth.csv from the run directory; writes
/// imputed.csv, ledger.jsonl, report.json, report.txt and config.impute.json.
void cmd_impute(const RunConfig& config);

/// Writes imputed_<method>.csv, report_<method>.json/.txt and
/// config.baseline.json.
void cmd_baseline(const RunConfig& config, const std::string& method);

/// Re-scores an imputed CSV (default: imputed.csv of the run), adding the
/// downstream classifier when enabled. Writes evaluation.json/.txt.
void cmd_evaluate(const RunConfig& config, const std::filesystem::path& imputed = {});

/// Writes bench.json, bench.csv, bench.txt and config.bench.json.
void cmd_bench(const RunConfig& config);

/// Runs a command; on failure writes error.json into the run directory
/// (when one can be named) and returns a nonzero exit code.
int run_guarded(const std::string& command, const RunConfig* config, const std::function<void()>& body);

}  // namespace llmforest::cli
