#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "llmforest/infograph.hpp"
#include "llmforest/merge.hpp"
#include "llmforest/table.hpp"
#include "llmforest/walk.hpp"

namespace llmforest {

struct BenchConfig {
  std::vector<std::size_t> sizes = {1000, 2000, 3000, 4000, 5000};
  std::size_t features = 22;
  std::size_t neighbors = 5;
  std::size_t repetitions = 3;
  int merge_levels = 3;
  MergeThreshold sigma;
  int walk_steps = 2;
  std::uint64_t seed = 0;
  std::size_t workers = 1;  // graph pipeline merge only; KNN stays sequential

  void validate() const;
};

struct BenchReport {
  std::vector<std::size_t> sizes;
  std::vector<std::vector<double>> knn_samples;    // seconds, per size
  std::vector<std::vector<double>> graph_samples;
  std::vector<double> knn_seconds;                 // medians
  std::vector<double> graph_seconds;
  double knn_slope = 0.0;
  double graph_slope = 0.0;

  std::string to_json() const;
  /// size,method,repetition,seconds
  std::string to_csv() const;
  std::string to_text() const;
};

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);

/// Bipartite build, merge hierarchy and walk-based top-q for every row.
std::vector<std::vector<std::size_t>> graph_neighbor_search(const Table& table, std::size_t q,
                                                            int merge_levels, const MergeThreshold& sigma,
                                                            int walk_steps, std::uint64_t seed,
                                                            std::size_t workers = 1);

/// Times KNN and the graph pipeline on generated tables of each size.
BenchReport bench_neighbor_search(const BenchConfig& config);

}  // namespace llmforest
