#include "llmforest/merge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "llmforest/errors.hpp"
#include "llmforest/parallel.hpp"
#include "llmforest/rng.hpp"

namespace llmforest {

bool MergeThreshold::admits(std::size_t shared, std::size_t union_size) const {
  if (unit == Unit::shared_count) return static_cast<double>(shared) >= value;
  const double s = union_size == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(union_size);
  return s >= value;
}

MergeThreshold MergeThreshold::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ConfigError("merge threshold needs a unit, e.g. 'jaccard:0.5' or 'shared_count:20'");
  const auto unit = text.substr(0, colon);
  double v = 0.0;
  if (!parse_number(text.substr(colon + 1), v))
    throw ConfigError("merge threshold value is not a number: '" + std::string(text) + "'");
  MergeThreshold t;
  t.value = v;
  if (unit == "jaccard") {
    if (v < 0.0 || v > 1.0) throw ConfigError("jaccard threshold must lie in [0, 1]");
    t.unit = Unit::jaccard;
  } else if (unit == "shared_count" || unit == "shared") {
    if (v < 0.0) throw ConfigError("shared_count threshold must be non-negative");
    t.unit = Unit::shared_count;
  } else {
    throw ConfigError("unknown merge threshold unit '" + std::string(unit) + "'");
  }
  return t;
}

std::string MergeThreshold::to_string() const {
  return std::string(unit == Unit::jaccard ? "jaccard:" : "shared_count:") + serialize_cell(value);
}

double jaccard(std::span<const NodeEdge> a, std::span<const NodeEdge> b) {
  std::size_t shared = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].entry < b[j].entry) {
      ++i;
    } else if (b[j].entry < a[i].entry) {
      ++j;
    } else {
      ++shared;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - shared;
  return uni == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(uni);
}

std::vector<FusionCandidate> fusion_candidates(const BipartiteGraph& a, const BipartiteGraph& b,
                                               const MergeThreshold& sigma) {
  if (a.entry_count() != b.entry_count())
    throw GraphError("graphs do not share the same entry set");
  const std::size_t ra = a.node_count();
  const std::size_t rb = b.node_count();
  std::vector<FusionCandidate> out;
  auto consider = [&](std::size_t l, std::size_t r, std::size_t shared) {
    const std::size_t uni = a.node_edges(l).size() + b.node_edges(r).size() - shared;
    if (!sigma.admits(shared, uni)) return;
    const double s = uni == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(uni);
    out.push_back({l, r, shared, s});
  };

  const bool zero_admitted = sigma.value <= 0.0;
  constexpr std::size_t kDenseLimit = std::size_t{1} << 22;
  if (zero_admitted || ra * rb <= kDenseLimit) {
    std::vector<std::size_t> shared(ra * rb, 0);
    for (std::size_t i = 0; i < a.entry_count(); ++i)
      for (const auto& ea : a.entry_edges(i))
        for (const auto& eb : b.entry_edges(i)) ++shared[ea.node * rb + eb.node];
    for (std::size_t l = 0; l < ra; ++l)
      for (std::size_t r = 0; r < rb; ++r)
        if (zero_admitted || shared[l * rb + r] > 0) consider(l, r, shared[l * rb + r]);
  } else {
    std::unordered_map<std::uint64_t, std::size_t> shared;
    for (std::size_t i = 0; i < a.entry_count(); ++i)
      for (const auto& ea : a.entry_edges(i))
        for (const auto& eb : b.entry_edges(i))
          ++shared[static_cast<std::uint64_t>(ea.node) * rb + eb.node];
    for (const auto& [key, count] : shared) consider(key / rb, key % rb, count);
  }
  std::sort(out.begin(), out.end(), [](const FusionCandidate& x, const FusionCandidate& y) {
    if (x.similarity != y.similarity) return x.similarity > y.similarity;
    if (x.left != y.left) return x.left < y.left;
    return x.right < y.right;
  });
  return out;
}

std::vector<FusionCandidate> select_fusions(const BipartiteGraph& a, const BipartiteGraph& b,
                                            const MergeThreshold& sigma) {
  std::vector<bool> used_a(a.node_count(), false), used_b(b.node_count(), false);
  std::vector<FusionCandidate> chosen;
  for (const auto& c : fusion_candidates(a, b, sigma)) {
    if (used_a[c.left] || used_b[c.right]) continue;
    used_a[c.left] = used_b[c.right] = true;
    chosen.push_back(c);
  }
  return chosen;
}

namespace {

std::vector<NodeEdge> sum_edges(std::span<const NodeEdge> x, std::span<const NodeEdge> y) {
  std::vector<NodeEdge> out;
  out.reserve(x.size() + y.size());
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].entry < y[j].entry)) {
      out.push_back(x[i++]);
    } else if (i == x.size() || y[j].entry < x[i].entry) {
      out.push_back(y[j++]);
    } else {
      out.push_back({x[i].entry, x[i].weight + y[j].weight});
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

BipartiteGraph merge_pair(const BipartiteGraph& a, const BipartiteGraph& b,
                          const MergeThreshold& sigma) {
  const auto fusions = select_fusions(a, b, sigma);
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> partner(a.node_count(), kNone);
  std::vector<bool> b_fused(b.node_count(), false);
  for (const auto& f : fusions) {
    partner[f.left] = f.right;
    b_fused[f.right] = true;
  }

  std::vector<ValueNode> nodes;
  std::vector<std::vector<NodeEdge>> edges;
  nodes.reserve(a.node_count() + b.node_count() - fusions.size());
  edges.reserve(nodes.capacity());
  for (std::size_t k = 0; k < a.node_count(); ++k) {
    ValueNode node;
    node.members = a.node(k).members;
    if (partner[k] == kNone) {
      auto e = a.node_edges(k);
      edges.emplace_back(e.begin(), e.end());
    } else {
      const auto& other = b.node(partner[k]).members;
      node.members.insert(node.members.end(), other.begin(), other.end());
      edges.push_back(sum_edges(a.node_edges(k), b.node_edges(partner[k])));
    }
    nodes.push_back(std::move(node));
  }
  for (std::size_t k = 0; k < b.node_count(); ++k) {
    if (b_fused[k]) continue;
    nodes.push_back(ValueNode{0, b.node(k).members});
    auto e = b.node_edges(k);
    edges.emplace_back(e.begin(), e.end());
  }
  std::vector<std::size_t> cover = a.feature_cover();
  cover.insert(cover.end(), b.feature_cover().begin(), b.feature_cover().end());
  std::sort(cover.begin(), cover.end());
  cover.erase(std::unique(cover.begin(), cover.end()), cover.end());
  return BipartiteGraph(a.entry_count(), std::move(cover), std::move(nodes), std::move(edges));
}

int max_merge_levels(std::size_t graph_count) {
  int levels = 0;
  std::size_t reach = 1;
  while (reach < graph_count) {
    reach *= 2;
    ++levels;
  }
  return levels;
}

std::vector<std::pair<std::size_t, std::size_t>> plan_level(std::span<const std::size_t> sizes,
                                                            std::uint64_t seed) {
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sizes[x] < sizes[y]; });
  if (order.size() % 2 == 1) order.pop_back();  // largest passes through
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k + 1 < order.size(); k += 2) pairs.emplace_back(order[k], order[k + 1]);
  return pairs;
}

namespace {

template <class T>
std::vector<T> next_level(std::vector<T> items,
                          const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                          std::vector<T> merged) {
  std::vector<bool> paired(items.size(), false);
  for (const auto& [x, y] : pairs) paired[x] = paired[y] = true;
  for (std::size_t k = 0; k < items.size(); ++k)
    if (!paired[k]) merged.push_back(std::move(items[k]));
  return merged;
}

void validate_pairs(const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::size_t count) {
  std::vector<bool> used(count, false);
  for (const auto& [x, y] : pairs) {
    if (x >= count || y >= count || x == y || used[x] || used[y])
      throw ConfigError("merge plan pairs are out of range or reuse a graph");
    used[x] = used[y] = true;
  }
}

}  // namespace

MergePlan plan_hierarchy(std::span<const BipartiteGraph> graphs, int levels,
                         const MergeThreshold& sigma, std::uint64_t seed) {
  if (levels < 0) throw ConfigError("merge levels must be non-negative");
  if (levels > max_merge_levels(graphs.size()))
    throw ConfigError("merge levels " + std::to_string(levels) + " exceed ceil(log2 d) = " +
                      std::to_string(max_merge_levels(graphs.size())));
  MergePlan plan;
  plan.levels = levels;
  plan.sigma = sigma;
  plan.seed = seed;
  std::vector<std::size_t> sizes;
  for (const auto& g : graphs) sizes.push_back(g.node_count());
  for (int level = 0; level < levels; ++level) {
    auto pairs = plan_level(sizes, mix_seed(seed, static_cast<std::uint64_t>(level)));
    std::vector<std::size_t> merged;
    for (const auto& [x, y] : pairs) merged.push_back(sizes[x] + sizes[y]);
    sizes = next_level(std::move(sizes), pairs, std::move(merged));
    plan.pairing.push_back(std::move(pairs));
  }
  return plan;
}

std::vector<BipartiteGraph> run_merge(std::vector<BipartiteGraph> graphs, const MergePlan& plan,
                                      std::size_t workers) {
  for (const auto& pairs : plan.pairing) {
    validate_pairs(pairs, graphs.size());
    std::vector<BipartiteGraph> merged(pairs.size());
    parallel_for(pairs.size(), workers, [&](std::size_t p) {
      merged[p] = merge_pair(graphs[pairs[p].first], graphs[pairs[p].second], plan.sigma);
    });
    graphs = next_level(std::move(graphs), pairs, std::move(merged));
  }
  return graphs;
}

std::string MergePlan::to_json() const {
  nlohmann::ordered_json j;
  j["levels"] = levels;
  j["sigma"] = sigma.to_string();
  j["seed"] = seed;
  j["pairing"] = nlohmann::ordered_json::array();
  for (const auto& level : pairing) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [x, y] : level) arr.push_back({x, y});
    j["pairing"].push_back(std::move(arr));
  }
  return j.dump();
}

MergePlan MergePlan::from_json(std::string_view text) {
  MergePlan plan;
  try {
    const auto j = nlohmann::json::parse(text);
    plan.levels = j.at("levels").get<int>();
    plan.sigma = MergeThreshold::parse(j.at("sigma").get<std::string>());
    plan.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& level : j.at("pairing")) {
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (const auto& p : level) pairs.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
      plan.pairing.push_back(std::move(pairs));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed merge plan: ") + e.what());
  }
  return plan;
}

}  // namespace llmforest
