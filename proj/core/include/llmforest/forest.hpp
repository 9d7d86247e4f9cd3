#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "llmforest/infograph.hpp"
#include "llmforest/llm.hpp"
#include "llmforest/merge.hpp"
#include "llmforest/prompt.hpp"
#include "llmforest/walk.hpp"

namespace llmforest {

enum class VotingMode { confidence_weighted, majority };

std::string_view to_string(VotingMode mode);
/// "confidence", "confidence_weighted" or "majority".
VotingMode parse_voting_mode(std::string_view text);

struct ConfidenceWeights {
  double high = 1.0;
  double medium = 0.6;
  double low = 0.3;

  double of(Confidence c) const;
  /// Positive and ordered high >= medium >= low.
  void validate() const;
};

struct ForestConfig {
  std::size_t trees = 3;      // m
  std::size_t neighbors = 5;  // q
  int merge_levels = 3;       // clamped to ceil(log2 d) per table
  MergeThreshold sigma;
  WalkConfig walk;            // rounds and seed are overridden per tree
  VotingMode voting = VotingMode::confidence_weighted;
  ConfidenceWeights weights;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  GraphOptions graph;
  PromptOptions prompt;
  PromptTemplate prompt_template;

  void validate() const;
};

struct TreeNeighbors {
  std::size_t tree_id = 0;
  MergePlan plan;
  std::size_t graph_count = 0;          // graphs after merging
  std::vector<NeighborSet> neighbors;   // aligned with the targets passed in
};

/// Plans and runs this tree's merge hierarchy (seeded by seed and tree_id)
/// and selects up to q neighbors for every target on the merged graphs.
TreeNeighbors grow_tree(std::span<const BipartiteGraph> graphs, std::span<const std::size_t> targets,
                        std::size_t tree_id, const ForestConfig& config);

struct VoteOutcome {
  Cell value;
  Confidence confidence = Confidence::medium;  // winner's strongest vote
  double score = 0.0;
};

/// Sums weights per candidate value; ties go to the candidate holding the
/// single highest-confidence vote, then to the smallest value. Majority mode
/// counts every vote as 1. Throws std::invalid_argument on an empty list.
VoteOutcome weighted_vote(std::span<const ImputationVote> votes, VotingMode mode,
                          const ConfidenceWeights& weights = {});

enum class Fallback { none, neighbor_mode, global_mode };
std::string_view to_string(Fallback f);

/// Ledger record of one masked cell.
struct CellLedger {
  std::size_t row = 0;
  std::size_t column = 0;
  std::string feature;
  std::vector<ImputationVote> votes;
  std::vector<std::size_t> unimputed_trees;  // no answer or no prompt
  std::vector<std::size_t> invalid_trees;    // answer outside the domain
  Cell winner;
  std::optional<Confidence> confidence;      // absent for fallback cells
  Fallback fallback = Fallback::none;
};

/// One JSON line per cell:
/// {row, feature, votes[], unimputed[], invalid[], winner, confidence, fallback}
void write_ledger(std::ostream& out, std::span<const CellLedger> ledger);
void write_ledger(const std::filesystem::path& path, std::span<const CellLedger> ledger);
std::vector<CellLedger> read_ledger(const std::filesystem::path& path, const Table& table);

struct ImputeOptions {
  /// JSON-lines record of raw responses per finished target. Empty disables.
  std::filesystem::path checkpoint;
  /// Reuse responses found in `checkpoint` instead of calling the backend.
  bool resume = false;
  /// Stored in the checkpoint header; resume refuses a different value.
  std::string fingerprint;
};

struct ForestResult {
  Table imputed;
  std::vector<CellLedger> ledger;  // row-major cell order
  std::vector<TreeNeighbors> trees;
  std::size_t backend_calls = 0;
  std::size_t parse_failures = 0;
};

/// Raised when the backend fails beyond its retry policy. Finished targets
/// are already in the checkpoint.
class ImputationAborted : public std::runtime_error {
 public:
  ImputationAborted(const std::string& message, std::size_t completed, std::size_t total)
      : std::runtime_error(message), completed_(completed), total_(total) {}
  std::size_t completed() const { return completed_; }
  std::size_t total() const { return total_; }

 private:
  std::size_t completed_;
  std::size_t total_;
};

/// Fills every missing cell: forest vote, else mode of the target's
/// neighbors in that column, else the global column mode.
ForestResult impute_all(const Table& table, const ForestConfig& config, Backend& backend,
                        const ImputeOptions& options = {});

}  // namespace llmforest
