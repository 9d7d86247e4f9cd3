#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "llmforest/table.hpp"

namespace llmforest {

/// Rows fall into equal-sized clusters. The first `signature_features`
/// columns hold the cluster's own value (one value per cluster, so every
/// such column has `clusters` distinct values); the remaining columns are
/// uniform noise over `noise_values` values. All columns are categorical.
struct ClusterTableSpec {
  std::size_t rows = 100;
  std::size_t clusters = 4;
  std::size_t features = 10;
  std::size_t signature_features = 8;
  std::size_t noise_values = 10;
  std::uint64_t seed = 0;
};

Table make_cluster_table(const ClusterTableSpec& spec, std::vector<std::size_t>* cluster_of = nullptr);

/// Categorical benchmark table: each cell copies its row cluster's value
/// with probability 0.7, otherwise draws one of `values` uniformly.
Table make_bench_table(std::size_t rows, std::size_t features, std::uint64_t seed,
                       std::size_t clusters = 8, std::size_t values = 6);

}  // namespace llmforest
