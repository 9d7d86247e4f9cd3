#include "llmforest/walk.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "llmforest/errors.hpp"

namespace llmforest {

void WalkConfig::validate() const {
  if (steps != 2 && steps != 4) throw ConfigError("walk steps must be 2 or 4");
  if (rounds < 1) throw ConfigError("walk rounds (q) must be at least 1");
  if (!(temperature > 0.0)) throw ConfigError("walk temperature must be positive");
  if (retry_factor < 1) throw ConfigError("walk retry factor must be at least 1");
}

namespace {

// Appends the cumulative softmax of `weights` (max-shifted) to `cdf`.
template <class Edges>
void append_cdf(const Edges& edges, double temperature, std::vector<double>& cdf) {
  if (edges.empty()) return;
  double top = edges[0].weight;
  for (const auto& e : edges) top = std::max(top, e.weight);
  double acc = 0.0;
  for (const auto& e : edges) {
    acc += std::exp((e.weight - top) / temperature);
    cdf.push_back(acc);
  }
}

std::size_t sample_cdf(std::span<const double> cdf, Rng& rng) {
  const double u = rng.uniform() * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<std::size_t>(it - cdf.begin());
}

double cdf_probability(std::span<const double> cdf, std::size_t k) {
  const double lo = k == 0 ? 0.0 : cdf[k - 1];
  return (cdf[k] - lo) / cdf.back();
}

}  // namespace

WalkIndex::WalkIndex(const BipartiteGraph& graph, double temperature)
    : graph_(&graph), temperature_(temperature) {
  if (!(temperature > 0.0)) throw ConfigError("walk temperature must be positive");
  entry_offsets_.reserve(graph.entry_count() + 1);
  entry_cdf_.reserve(graph.edge_count());
  entry_offsets_.push_back(0);
  for (std::size_t i = 0; i < graph.entry_count(); ++i) {
    append_cdf(graph.entry_edges(i), temperature, entry_cdf_);
    entry_offsets_.push_back(entry_cdf_.size());
  }
  node_offsets_.reserve(graph.node_count() + 1);
  node_cdf_.reserve(graph.edge_count());
  node_offsets_.push_back(0);
  for (std::size_t k = 0; k < graph.node_count(); ++k) {
    append_cdf(graph.node_edges(k), temperature, node_cdf_);
    node_offsets_.push_back(node_cdf_.size());
  }
}

std::optional<std::size_t> WalkIndex::forward(std::size_t entry, Rng& rng) const {
  const std::size_t lo = entry_offsets_[entry];
  const std::size_t hi = entry_offsets_[entry + 1];
  if (lo == hi) return std::nullopt;
  return sample_cdf({entry_cdf_.data() + lo, hi - lo}, rng);
}

std::size_t WalkIndex::backward(std::size_t node, Rng& rng) const {
  const std::size_t lo = node_offsets_[node];
  const std::size_t hi = node_offsets_[node + 1];
  if (lo == hi) throw GraphError("value node without edges");
  return sample_cdf({node_cdf_.data() + lo, hi - lo}, rng);
}

double WalkIndex::forward_probability(std::size_t entry, std::size_t edge_position) const {
  const std::size_t lo = entry_offsets_[entry];
  return cdf_probability({entry_cdf_.data() + lo, entry_offsets_[entry + 1] - lo}, edge_position);
}

double WalkIndex::backward_probability(std::size_t node, std::size_t edge_position) const {
  const std::size_t lo = node_offsets_[node];
  return cdf_probability({node_cdf_.data() + lo, node_offsets_[node + 1] - lo}, edge_position);
}

std::optional<std::size_t> forward_step(const BipartiteGraph& graph, std::size_t entry, Rng& rng,
                                        double temperature) {
  const auto edges = graph.entry_edges(entry);
  if (edges.empty()) return std::nullopt;
  std::vector<double> cdf;
  append_cdf(edges, temperature, cdf);
  return edges[sample_cdf(cdf, rng)].node;
}

std::size_t backward_step(const BipartiteGraph& graph, std::size_t node, Rng& rng,
                          double temperature) {
  const auto edges = graph.node_edges(node);
  if (edges.empty()) throw GraphError("value node without edges");
  std::vector<double> cdf;
  append_cdf(edges, temperature, cdf);
  return edges[sample_cdf(cdf, rng)].entry;
}

std::optional<WalkResult> walk_once(const WalkIndex& index, std::size_t target, int steps, Rng& rng) {
  if (steps <= 0 || steps % 2 != 0) throw ConfigError("walk steps must be a positive even number");
  const auto& graph = index.graph();
  std::size_t entry = target;
  double total = 0.0;
  for (int s = 0; s < steps; s += 2) {
    const auto pos = index.forward(entry, rng);
    if (!pos) return std::nullopt;  // only possible on the first move
    const auto& fe = graph.entry_edges(entry)[*pos];
    total += fe.weight;
    const auto& be = graph.node_edges(fe.node)[index.backward(fe.node, rng)];
    total += be.weight;
    entry = be.entry;
  }
  return WalkResult{entry, total / static_cast<double>(steps)};
}

std::optional<WalkResult> walk_once(const BipartiteGraph& graph, std::size_t target, int steps,
                                    Rng& rng, double temperature) {
  return walk_once(WalkIndex(graph, temperature), target, steps, rng);
}

NeighborSet select_neighbors(std::span<const WalkIndex> indices, std::size_t target,
                             const WalkConfig& config) {
  config.validate();
  NeighborSet result;
  result.target = target;
  Rng rng(mix_seed(config.seed, target));
  std::unordered_map<std::size_t, double> best;
  const std::size_t budget = config.retry_factor * config.rounds;
  std::vector<std::size_t> found;

  for (std::size_t g = 0; g < indices.size(); ++g) {
    const auto& index = indices[g];
    if (target >= index.graph().entry_count())
      throw GraphError("target entry outside the graph");
    if (index.graph().isolated(target)) continue;
    found.clear();
    for (std::size_t walk = 0; walk < budget && found.size() < config.rounds; ++walk) {
      const auto r = walk_once(index, target, config.steps, rng);
      if (!r || r->endpoint == target) continue;
      if (std::find(found.begin(), found.end(), r->endpoint) == found.end()) found.push_back(r->endpoint);
      auto [it, inserted] = best.emplace(r->endpoint, r->score);
      if (!inserted) it->second = std::max(it->second, r->score);
    }
    if (!found.empty()) {
      std::sort(found.begin(), found.end());
      result.per_graph_provenance[g] = found;
    }
  }

  result.ranked.reserve(best.size());
  for (const auto& [entry, score] : best) result.ranked.push_back({entry, score});
  std::sort(result.ranked.begin(), result.ranked.end(), [](const ScoredEntry& a, const ScoredEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.entry < b.entry;
  });
  if (result.ranked.size() > config.rounds) result.ranked.resize(config.rounds);
  return result;
}

std::vector<WalkIndex> index_graphs(std::span<const BipartiteGraph> graphs, double temperature) {
  std::vector<WalkIndex> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.emplace_back(g, temperature);
  return out;
}

NeighborSet select_neighbors(std::span<const BipartiteGraph> graphs, std::size_t target,
                             const WalkConfig& config) {
  config.validate();
  const auto indices = index_graphs(graphs, config.temperature);
  return select_neighbors(std::span<const WalkIndex>(indices), target, config);
}

std::string NeighborSet::to_json() const {
  nlohmann::ordered_json j;
  j["target"] = target;
  j["ranked"] = nlohmann::ordered_json::array();
  for (const auto& e : ranked) j["ranked"].push_back({{"entry", e.entry}, {"score", e.score}});
  j["provenance"] = nlohmann::ordered_json::object();
  for (const auto& [g, entries] : per_graph_provenance) j["provenance"][std::to_string(g)] = entries;
  return j.dump();
}

}  // namespace llmforest
