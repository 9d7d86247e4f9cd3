#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "llmforest/infograph.hpp"
#include "llmforest/rng.hpp"

namespace llmforest {

struct WalkConfig {
  int steps = 2;              // 2 or 4
  std::size_t rounds = 5;     // q
  std::uint64_t seed = 0;
  double temperature = 1.0;   // softmax scale on edge weights
  std::size_t retry_factor = 5;  // walk budget per graph = retry_factor * rounds

  void validate() const;
};

struct ScoredEntry {
  std::size_t entry = 0;
  double score = 0.0;
};

struct NeighborSet {
  std::size_t target = 0;
  std::vector<ScoredEntry> ranked;  // score descending, then entry ascending
  std::map<std::size_t, std::vector<std::size_t>> per_graph_provenance;

  bool empty() const { return ranked.empty(); }
  std::string to_json() const;
};

/// Softmax-weighted sampler over one graph. Cumulative exp(w / T) tables are
/// precomputed for both sides so each step costs O(log degree).
class WalkIndex {
 public:
  WalkIndex(const BipartiteGraph& graph, double temperature);

  const BipartiteGraph& graph() const { return *graph_; }
  double temperature() const { return temperature_; }

  /// Entry -> value node (index into entry_edges(entry)). nullopt if isolated.
  std::optional<std::size_t> forward(std::size_t entry, Rng& rng) const;
  /// Value node -> position in node_edges(node).
  std::size_t backward(std::size_t node, Rng& rng) const;

  /// Exact transition probability, for verification.
  double forward_probability(std::size_t entry, std::size_t edge_position) const;
  double backward_probability(std::size_t node, std::size_t edge_position) const;

 private:
  const BipartiteGraph* graph_;
  double temperature_;
  std::vector<double> entry_cdf_;                  // aligned with entry CSR
  std::vector<std::size_t> entry_offsets_;
  std::vector<double> node_cdf_;
  std::vector<std::size_t> node_offsets_;
};

/// One softmax draw from entry i; returns the value node id, or nullopt when i
/// has no edges in this graph.
std::optional<std::size_t> forward_step(const BipartiteGraph& graph, std::size_t entry, Rng& rng,
                                        double temperature = 1.0);
/// One softmax draw from a value node; returns an entry index.
std::size_t backward_step(const BipartiteGraph& graph, std::size_t node, Rng& rng,
                          double temperature = 1.0);

struct WalkResult {
  std::size_t endpoint = 0;
  double score = 0.0;  // mean weight of traversed edges
};

/// Alternates forward/backward moves for `steps` moves from `target`.
/// nullopt when target is isolated in the graph.
std::optional<WalkResult> walk_once(const WalkIndex& index, std::size_t target, int steps, Rng& rng);
std::optional<WalkResult> walk_once(const BipartiteGraph& graph, std::size_t target, int steps,
                                    Rng& rng, double temperature = 1.0);

/// Walks every graph in which target has edges, keeps the best path score per
/// endpoint, and returns the top `rounds` candidates. The generator is
/// seeded from (config.seed, target) so results do not depend on call order.
NeighborSet select_neighbors(std::span<const WalkIndex> indices, std::size_t target,
                             const WalkConfig& config);
NeighborSet select_neighbors(std::span<const BipartiteGraph> graphs, std::size_t target,
                             const WalkConfig& config);

std::vector<WalkIndex> index_graphs(std::span<const BipartiteGraph> graphs, double temperature);

}  // namespace llmforest
