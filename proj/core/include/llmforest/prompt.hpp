#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "llmforest/stats.hpp"
#include "llmforest/table.hpp"
#include "llmforest/walk.hpp"

namespace llmforest {

/// Prompt wording. `system` and `user` are layouts with the placeholders
/// {setup} {strategies} {correlations} {descriptions} {neighbors} {target}
/// {instruction}; `setup` may use {subject} and {target_id}.
struct PromptTemplate {
  std::string system = "{setup}\n\n{strategies}";
  std::string user = "{correlations}\n\n{descriptions}\n\n{neighbors}\n\n{target}\n\n{instruction}";
  std::string setup =
      "Your task is to recover the missing values of {subject} {target_id} in a tabular "
      "health dataset.";
  std::string strategies_intro =
      "Pick whatever approach suits each missing feature; useful options, in any order, are:";
  std::vector<std::string> strategies = {
      "Using the mode of similar neighbors",
      "Exploiting correlations between features",
      "Applying your knowledge in health domain",
      "Falling back on the overall distribution of a feature",
  };

  /// Reads system.txt, user.txt, setup.txt and strategies.txt (one strategy
  /// per line) from `dir`; files that are absent keep their defaults.
  static PromptTemplate load(const std::filesystem::path& dir);
};

struct PromptOptions {
  std::string subject = "patient";
  double correlation_threshold = 0.3;
  std::size_t max_correlation_pairs = 15;
  std::size_t char_budget = 24000;  // system + user characters
};

/// One neighbor as shown to the model: observed features only.
struct NeighborRecord {
  std::size_t entry = 0;
  double score = 0.0;
  std::vector<std::pair<std::string, std::string>> values;  // schema order
};

struct PromptBundle {
  std::string system_text;
  std::string user_text;
  std::size_t target = 0;
  std::vector<std::string> missing_features;
  std::vector<NeighborRecord> neighbors;          // included blocks, score order
  std::vector<std::string> continuous_features;   // subset of missing_features

  /// FNV-1a 64 of system and user text, hex.
  std::string hash() const;
};

/// "{feature}: {value};" for observed cells in schema order, followed by
/// "the {subject} has missing features: {a, b}." when any cell is missing.
std::string row_to_text(std::span<const Cell> row, std::span<const FeatureSpec> schema,
                        const std::string& subject = "patient");

std::string correlation_summary(const FeatureStats& stats, std::span<const FeatureSpec> schema,
                                const PromptOptions& options);

/// nullopt when no neighbor has an observed value in any of the target's
/// missing features (or none fit the character budget): the caller falls back.
std::optional<PromptBundle> build_prompt(std::size_t target, const NeighborSet& neighbors,
                                         const FeatureStats& stats, const Table& table,
                                         const PromptTemplate& tmpl = {},
                                         const PromptOptions& options = {});

/// Replaces {key} occurrences; unknown placeholders are left untouched.
std::string fill_placeholders(const std::string& text,
                              const std::map<std::string, std::string>& values);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace llmforest
