#include "llmforest/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "llmforest/baselines.hpp"
#include "llmforest/errors.hpp"
#include "llmforest/rng.hpp"
#include "llmforest/synthetic.hpp"

namespace llmforest {

void BenchConfig::validate() const {
  if (sizes.size() < 2) throw ConfigError("bench needs at least two sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 2) throw ConfigError("bench sizes must be at least 2");
    if (i && sizes[i] <= sizes[i - 1]) throw ConfigError("bench sizes must be strictly increasing");
  }
  if (features < 1 || neighbors < 1) throw ConfigError("bench needs features >= 1 and neighbors >= 1");
  if (repetitions < 1) throw ConfigError("bench needs at least one repetition");
  if (merge_levels < 0) throw ConfigError("merge levels must be non-negative");
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope needs two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<std::vector<std::size_t>> graph_neighbor_search(const Table& table, std::size_t q,
                                                            int merge_levels, const MergeThreshold& sigma,
                                                            int walk_steps, std::uint64_t seed,
                                                            std::size_t workers) {
  const auto graphs = build_all(table, {}, workers);
  const int levels = std::min(merge_levels, max_merge_levels(graphs.size()));
  const auto plan = plan_hierarchy(graphs, levels, sigma, mix_seed(seed, 1));
  const auto merged = run_merge(graphs, plan, workers);

  WalkConfig walk;
  walk.steps = walk_steps;
  walk.rounds = q;
  walk.seed = mix_seed(seed, 2);
  const auto indices = index_graphs(merged, walk.temperature);
  std::vector<std::vector<std::size_t>> out(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto set = select_neighbors(indices, r, walk);
    for (const auto& e : set.ranked) out[r].push_back(e.entry);
  }
  return out;
}

namespace {

template <class Fn>
double time_seconds(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

BenchReport bench_neighbor_search(const BenchConfig& config) {
  config.validate();
  BenchReport report;
  report.sizes = config.sizes;
  std::vector<double> xs;
  for (std::size_t s = 0; s < config.sizes.size(); ++s) {
    const std::size_t n = config.sizes[s];
    const Table table = make_bench_table(n, config.features, mix_seed(config.seed, n));
    std::vector<double> knn, graph;
    std::size_t sink = 0;
    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
      knn.push_back(time_seconds([&] { sink += knn_neighbor_search(table, config.neighbors, 1).size(); }));
      graph.push_back(time_seconds([&] {
        sink += graph_neighbor_search(table, config.neighbors, config.merge_levels, config.sigma,
                                      config.walk_steps, config.seed, config.workers)
                    .size();
      }));
    }
    if (sink == 0) throw std::logic_error("benchmark produced no neighbor lists");
    report.knn_seconds.push_back(median(knn));
    report.graph_seconds.push_back(median(graph));
    report.knn_samples.push_back(std::move(knn));
    report.graph_samples.push_back(std::move(graph));
    xs.push_back(static_cast<double>(n));
  }
  report.knn_slope = loglog_slope(xs, report.knn_seconds);
  report.graph_slope = loglog_slope(xs, report.graph_seconds);
  return report;
}

std::string BenchReport::to_json() const {
  nlohmann::ordered_json j;
  j["sizes"] = sizes;
  j["knn_seconds"] = knn_seconds;
  j["graph_seconds"] = graph_seconds;
  j["knn_slope"] = knn_slope;
  j["graph_slope"] = graph_slope;
  j["knn_samples"] = knn_samples;
  j["graph_samples"] = graph_samples;
  return j.dump(2) + "\n";
}

std::string BenchReport::to_csv() const {
  std::ostringstream out;
  out << "size,method,repetition,seconds\n";
  char buf[64];
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    for (std::size_t r = 0; r < knn_samples[s].size(); ++r) {
      std::snprintf(buf, sizeof buf, "%.9g", knn_samples[s][r]);
      out << sizes[s] << ",knn," << r << ',' << buf << '\n';
    }
    for (std::size_t r = 0; r < graph_samples[s].size(); ++r) {
      std::snprintf(buf, sizeof buf, "%.9g", graph_samples[s][r]);
      out << sizes[s] << ",graph," << r << ',' << buf << '\n';
    }
  }
  return out.str();
}

std::string BenchReport::to_text() const {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%8s  %12s  %12s\n", "n", "knn_s", "graph_s");
  out << line;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    std::snprintf(line, sizeof line, "%8zu  %12.6f  %12.6f\n", sizes[s], knn_seconds[s], graph_seconds[s]);
    out << line;
  }
  std::snprintf(line, sizeof line, "%8s  %12.3f  %12.3f\n", "slope", knn_slope, graph_slope);
  out << line;
  return out.str();
}

}  // namespace llmforest
