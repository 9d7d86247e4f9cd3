#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "llmforest/baselines.hpp"
#include "llmforest/bench.hpp"
#include "llmforest/forest.hpp"
#include "llmforest/llm.hpp"
#include "llmforest/logreg.hpp"
#include "llmforest/missingness.hpp"

namespace llmforest::cli {

struct MissingnessSpec {
  enum class Mechanism { mcar, mar, mnar };
  enum class Order { mask_then_split, split_then_mask };
  Mechanism mechanism = Mechanism::mcar;
  double rate = 0.4;
  double percentile = 0.3;  // MAR label cutoff
  MnarOptions mnar;
  Order order = Order::mask_then_split;
  double train_ratio = 0.8;
};

struct EvalSpec {
  bool downstream = false;
  LogregConfig logreg;
};

struct BaselineSpec {
  std::string method = "mode";  // mean, mode, knn
  std::size_t k = 5;
};

/// Everything a command needs. Relative paths in a config file resolve
/// against the file's directory.
struct RunConfig {
  std::filesystem::path input;       // complete CSV to mask
  std::filesystem::path schema;
  std::filesystem::path output_dir = "runs";
  std::filesystem::path templates;   // optional prompt template directory
  std::string run_id;                // defaults to "run-<seed>"
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  bool resume = false;

  MissingnessSpec missingness;
  ForestConfig forest;
  BackendConfig backend;
  BaselineSpec baseline;
  EvalSpec eval;
  BenchConfig bench;

  /// Throws ConfigError when the seed is absent or a value is out of range.
  void validate() const;
  std::uint64_t required_seed() const;
  std::filesystem::path run_dir() const;
  /// Fully resolved configuration; loading it reproduces this RunConfig.
  std::string to_json() const;
};

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace llmforest::cli
