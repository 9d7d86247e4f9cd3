#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "llmforest/infograph.hpp"

namespace llmforest {

/// Fusion gate for two value nodes. `jaccard` compares |A∩B|/|A∪B| against a
/// value in [0, 1]; `shared_count` requires |A∩B| >= value.
struct MergeThreshold {
  enum class Unit { jaccard, shared_count };
  Unit unit = Unit::shared_count;
  double value = 20.0;

  bool admits(std::size_t shared, std::size_t union_size) const;
  /// "jaccard:0.5" or "shared_count:20".
  static MergeThreshold parse(std::string_view text);
  std::string to_string() const;
};

/// |A∩B| / |A∪B| over sorted entry lists; 0 when both are empty.
double jaccard(std::span<const NodeEdge> a, std::span<const NodeEdge> b);

struct FusionCandidate {
  std::size_t left = 0;   // node id in the first graph
  std::size_t right = 0;  // node id in the second graph
  std::size_t shared = 0;
  double similarity = 0.0;
};

/// All cross-graph node pairs passing the threshold, sorted by descending
/// similarity, then (left, right) ascending.
std::vector<FusionCandidate> fusion_candidates(const BipartiteGraph& a, const BipartiteGraph& b,
                                               const MergeThreshold& sigma);

/// Greedy one-pass matching over the candidates: each node fused at most once.
std::vector<FusionCandidate> select_fusions(const BipartiteGraph& a, const BipartiteGraph& b,
                                            const MergeThreshold& sigma);

/// Fuses matched node pairs, summing per-entry weights (absent edges count
/// as 0). Output nodes: a's nodes in order (fused ones replaced by the fused
/// node), then b's unfused nodes in order.
BipartiteGraph merge_pair(const BipartiteGraph& a, const BipartiteGraph& b,
                          const MergeThreshold& sigma);

/// Per level, pairs index the graph list produced by the previous level.
/// A level's output lists merged pairs in pair order, then unpaired graphs
/// in index order.
struct MergePlan {
  int levels = 0;
  MergeThreshold sigma;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pairing;

  std::string to_json() const;
  static MergePlan from_json(std::string_view text);
};

/// ceil(log2(d)); 0 for d <= 1.
int max_merge_levels(std::size_t graph_count);

/// Orders one level: sizes ascending with seeded tie-breaks, the largest
/// graph left unpaired on odd counts, adjacent graphs paired.
std::vector<std::pair<std::size_t, std::size_t>> plan_level(std::span<const std::size_t> sizes,
                                                            std::uint64_t seed);

/// Plans `levels` levels. Sizes beyond the first level are estimated as
/// |R_a| + |R_b| for merged pairs since fusion counts are unknown until run.
MergePlan plan_hierarchy(std::span<const BipartiteGraph> graphs, int levels,
                         const MergeThreshold& sigma, std::uint64_t seed);

/// Executes the plan; merges within a level run on up to `workers` threads.
std::vector<BipartiteGraph> run_merge(std::vector<BipartiteGraph> graphs, const MergePlan& plan,
                                      std::size_t workers = 1);

}  // namespace llmforest
