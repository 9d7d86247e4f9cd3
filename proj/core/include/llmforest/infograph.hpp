#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "llmforest/table.hpp"

namespace llmforest {

/// One (feature, value) member of a value node. `code` indexes the feature's
/// domain: its distinct values, or its quantile bins for binned columns.
struct ValueKey {
  std::size_t feature = 0;
  std::size_t code = 0;
  std::string label;

  friend bool operator==(const ValueKey& a, const ValueKey& b) {
    return a.feature == b.feature && a.code == b.code;
  }
};

struct ValueNode {
  std::size_t id = 0;
  std::vector<ValueKey> members;
};

struct NodeEdge {
  std::size_t entry = 0;
  double weight = 0.0;
};

struct EntryEdge {
  std::size_t node = 0;
  double weight = 0.0;
};

/// Entries on the left, value nodes on the right. Node adjacency lists are
/// sorted by entry; entry adjacency lists are sorted by node id.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;
  BipartiteGraph(std::size_t entries, std::vector<std::size_t> feature_cover,
                 std::vector<ValueNode> nodes, std::vector<std::vector<NodeEdge>> node_edges);

  std::size_t entry_count() const { return entry_count_; }
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<ValueNode>& nodes() const { return nodes_; }
  const ValueNode& node(std::size_t id) const { return nodes_[id]; }
  const std::vector<std::size_t>& feature_cover() const { return feature_cover_; }

  std::span<const NodeEdge> node_edges(std::size_t id) const { return node_edges_[id]; }
  std::span<const EntryEdge> entry_edges(std::size_t entry) const {
    return {entry_edges_.data() + entry_offsets_[entry],
            entry_offsets_[entry + 1] - entry_offsets_[entry]};
  }
  bool isolated(std::size_t entry) const { return entry_edges(entry).empty(); }
  std::optional<double> weight(std::size_t entry, std::size_t node) const;

  std::size_t edge_count() const { return entry_edges_.size(); }
  double total_weight() const;

 private:
  std::size_t entry_count_ = 0;
  std::vector<std::size_t> feature_cover_;
  std::vector<ValueNode> nodes_;
  std::vector<std::vector<NodeEdge>> node_edges_;
  std::vector<std::size_t> entry_offsets_;
  std::vector<EntryEdge> entry_edges_;
};

struct GraphOptions {
  std::size_t bin_count = 10;                // B
  std::size_t max_unbinned_distinct = 50;    // normal columns above this are binned
};

/// log(1 + p), natural log. Throws ConfigError for p < 0.
double edge_weight(double p);

/// Probability model of one column: 1/|R_j| (categorical), Gaussian density
/// (normal, numeric-binned), or observed frequency (empirical).
class ColumnProbability {
 public:
  ColumnProbability(const Table& table, std::size_t column);
  double operator()(const Cell& value) const;

 private:
  FeatureSpec spec_;
  std::vector<std::size_t> counts_;  // per distinct value
};

/// Single-value convenience over a raw observed column.
double value_probability(const FeatureSpec& spec, const Cell& value,
                         std::span<const Cell> observed_column);

/// Whether column `j` is represented by quantile bins rather than values.
bool uses_bins(const FeatureSpec& spec, const GraphOptions& options = {});

BipartiteGraph build_bipartite(const Table& table, std::size_t column,
                               const GraphOptions& options = {});
std::vector<BipartiteGraph> build_all(const Table& table, const GraphOptions& options = {},
                                      std::size_t workers = 1);

/// Line-oriented dump:
///   graph entries=<n> features=<j,...> nodes=<k> edges=<e>
///   node <id> <feature>:<label>|<feature>:<label>...
///   edge <entry> <node> <weight>
void dump_graph(std::ostream& out, const BipartiteGraph& graph, const Table* table = nullptr);

}  // namespace llmforest
