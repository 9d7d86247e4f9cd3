#include "llmforest/infograph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "llmforest/errors.hpp"
#include "llmforest/parallel.hpp"

namespace llmforest {

BipartiteGraph::BipartiteGraph(std::size_t entries, std::vector<std::size_t> feature_cover,
                               std::vector<ValueNode> nodes,
                               std::vector<std::vector<NodeEdge>> node_edges)
    : entry_count_(entries),
      feature_cover_(std::move(feature_cover)),
      nodes_(std::move(nodes)),
      node_edges_(std::move(node_edges)) {
  if (nodes_.size() != node_edges_.size())
    throw GraphError("node list and adjacency list sizes differ");
  std::sort(feature_cover_.begin(), feature_cover_.end());
  entry_offsets_.assign(entry_count_ + 1, 0);
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    nodes_[k].id = k;
    auto& edges = node_edges_[k];
    std::sort(edges.begin(), edges.end(),
              [](const NodeEdge& a, const NodeEdge& b) { return a.entry < b.entry; });
    for (const auto& e : edges) {
      if (e.entry >= entry_count_) throw GraphError("edge entry index out of range");
      ++entry_offsets_[e.entry + 1];
    }
  }
  for (std::size_t i = 0; i < entry_count_; ++i) entry_offsets_[i + 1] += entry_offsets_[i];
  entry_edges_.resize(entry_offsets_.back());
  std::vector<std::size_t> cursor(entry_offsets_.begin(), entry_offsets_.end() - 1);
  // Visiting nodes in id order leaves every entry list sorted by node id.
  for (std::size_t k = 0; k < nodes_.size(); ++k)
    for (const auto& e : node_edges_[k]) entry_edges_[cursor[e.entry]++] = {k, e.weight};
}

std::optional<double> BipartiteGraph::weight(std::size_t entry, std::size_t node) const {
  for (const auto& e : entry_edges(entry))
    if (e.node == node) return e.weight;
  return std::nullopt;
}

double BipartiteGraph::total_weight() const {
  double total = 0.0;
  for (const auto& e : entry_edges_) total += e.weight;
  return total;
}

double edge_weight(double p) {
  if (!(p >= 0.0)) throw ConfigError("probability must be non-negative");
  return std::log1p(p);
}

namespace {

double gaussian_density(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double probability_for(const FeatureSpec& spec, const Cell& value, std::size_t count) {
  if (is_missing(value)) throw GraphError("probability of a missing value is undefined");
  switch (spec.kind) {
    case FeatureKind::categorical:
      if (spec.distinct_values.empty()) throw GraphError("column '" + spec.name + "' has no values");
      return 1.0 / static_cast<double>(spec.distinct_values.size());
    case FeatureKind::normal:
    case FeatureKind::numeric_binned:
      if (!spec.stddev || *spec.stddev <= 0.0 || !is_number(value))
        throw GraphError("column '" + spec.name + "' has no usable normal model");
      return gaussian_density(as_number(value), *spec.mean, *spec.stddev);
    case FeatureKind::empirical:
      if (count == 0)
        throw GraphError("value '" + serialize_cell(value) + "' never observed in column '" +
                         spec.name + "'");
      return static_cast<double>(count) / static_cast<double>(spec.observed);
  }
  return 0.0;
}

}  // namespace

ColumnProbability::ColumnProbability(const Table& table, std::size_t column)
    : spec_(table.column(column)), counts_(spec_.distinct_values.size(), 0) {
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const auto code = table.code(i, column);
    if (code >= 0) ++counts_[static_cast<std::size_t>(code)];
  }
}

double ColumnProbability::operator()(const Cell& value) const {
  std::size_t count = 0;
  if (spec_.kind == FeatureKind::empirical) {
    if (auto code = spec_.code_of(value)) count = counts_[*code];
  }
  return probability_for(spec_, value, count);
}

double value_probability(const FeatureSpec& spec, const Cell& value,
                         std::span<const Cell> observed_column) {
  std::size_t count = 0;
  std::size_t observed = 0;
  for (const auto& c : observed_column) {
    if (is_missing(c)) continue;
    ++observed;
    if (compare_cells(c, value) == 0) ++count;
  }
  FeatureSpec local = spec;
  if (spec.kind == FeatureKind::empirical) local.observed = observed;
  return probability_for(local, value, count);
}

bool uses_bins(const FeatureSpec& spec, const GraphOptions& options) {
  if (spec.kind == FeatureKind::numeric_binned) return true;
  return spec.kind == FeatureKind::normal && spec.distinct_values.size() > options.max_unbinned_distinct;
}

BipartiteGraph build_bipartite(const Table& table, std::size_t column, const GraphOptions& options) {
  if (column >= table.cols()) throw GraphError("column index out of range");
  const auto& spec = table.column(column);
  if (spec.observed == 0) throw GraphError("column '" + spec.name + "' is fully missing");
  const std::size_t n = table.rows();
  const ColumnProbability probability(table, column);

  // Scan 1: domain code per entry.
  std::vector<std::int64_t> domain(n, -1);
  std::size_t domain_size = spec.distinct_values.size();
  std::vector<std::string> labels;
  if (uses_bins(spec, options)) {
    if (options.bin_count == 0) throw ConfigError("bin count must be positive");
    std::vector<double> sorted;
    sorted.reserve(spec.observed);
    for (std::size_t i = 0; i < n; ++i)
      if (!table.missing(i, column)) sorted.push_back(as_number(table.cell(i, column)));
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> cuts;
    for (std::size_t k = 1; k < options.bin_count; ++k)
      cuts.push_back(sorted[k * sorted.size() / options.bin_count]);
    domain_size = options.bin_count;
    std::vector<double> lo(domain_size, 0.0), hi(domain_size, 0.0);
    std::vector<bool> seen(domain_size, false);
    for (std::size_t i = 0; i < n; ++i) {
      if (table.missing(i, column)) continue;
      const double v = as_number(table.cell(i, column));
      const auto b = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
      domain[i] = static_cast<std::int64_t>(b);
      if (!seen[b]) {
        lo[b] = hi[b] = v;
        seen[b] = true;
      }
      lo[b] = std::min(lo[b], v);
      hi[b] = std::max(hi[b], v);
    }
    labels.resize(domain_size);
    for (std::size_t b = 0; b < domain_size; ++b)
      if (seen[b]) labels[b] = "[" + display_cell(lo[b]) + ", " + display_cell(hi[b]) + "]";
  } else {
    for (std::size_t i = 0; i < n; ++i) domain[i] = table.code(i, column);
    for (const auto& v : spec.distinct_values) labels.push_back(display_cell(v));
  }

  // Scan 2: edges.
  std::vector<std::vector<NodeEdge>> by_code(domain_size);
  for (std::size_t i = 0; i < n; ++i) {
    if (domain[i] < 0) continue;
    by_code[static_cast<std::size_t>(domain[i])].push_back(
        {i, edge_weight(probability(table.cell(i, column)))});
  }
  std::vector<ValueNode> nodes;
  std::vector<std::vector<NodeEdge>> node_edges;
  for (std::size_t code = 0; code < domain_size; ++code) {
    if (by_code[code].empty()) continue;
    ValueNode node;
    node.members.push_back({column, code, labels[code]});
    nodes.push_back(std::move(node));
    node_edges.push_back(std::move(by_code[code]));
  }
  return BipartiteGraph(n, {column}, std::move(nodes), std::move(node_edges));
}

std::vector<BipartiteGraph> build_all(const Table& table, const GraphOptions& options,
                                      std::size_t workers) {
  std::vector<BipartiteGraph> graphs(table.cols());
  parallel_for(table.cols(), workers,
               [&](std::size_t j) { graphs[j] = build_bipartite(table, j, options); });
  return graphs;
}

void dump_graph(std::ostream& out, const BipartiteGraph& graph, const Table* table) {
  out << "graph entries=" << graph.entry_count() << " features=";
  for (std::size_t k = 0; k < graph.feature_cover().size(); ++k)
    out << (k ? "," : "") << graph.feature_cover()[k];
  out << " nodes=" << graph.node_count() << " edges=" << graph.edge_count() << '\n';
  for (const auto& node : graph.nodes()) {
    out << "node " << node.id << ' ';
    for (std::size_t m = 0; m < node.members.size(); ++m) {
      const auto& key = node.members[m];
      if (m) out << '|';
      if (table)
        out << table->column(key.feature).name;
      else
        out << key.feature;
      out << ':' << key.label;
    }
    out << '\n';
  }
  char buf[64];
  for (std::size_t i = 0; i < graph.entry_count(); ++i) {
    for (const auto& e : graph.entry_edges(i)) {
      std::snprintf(buf, sizeof(buf), "%.17g", e.weight);
      out << "edge " << i << ' ' << e.node << ' ' << buf << '\n';
    }
  }
}

}  // namespace llmforest
