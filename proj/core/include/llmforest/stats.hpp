#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "llmforest/table.hpp"

namespace llmforest {

struct ColumnStats {
  Cell mode;                       // ties -> smallest by CellLess
  std::size_t mode_count = 0;
  std::size_t observed = 0;
  std::optional<double> mean;      // numeric columns
  std::optional<double> stddev;    // numeric columns, population
  std::vector<std::pair<Cell, std::size_t>> histogram;  // distinct value order
};

struct FeatureStats {
  std::vector<ColumnStats> columns;
  /// d x d row-major Pearson correlations over pairwise-complete rows.
  /// Categories are coded by order of first appearance; constant columns
  /// correlate 0 with everything else (and with themselves).
  std::vector<double> correlation;

  double corr(std::size_t a, std::size_t b) const { return correlation[a * columns.size() + b]; }
};

/// Throws DataError when a column has no observed cell.
FeatureStats feature_stats(const Table& table);

/// Column mode over observed cells; ties resolved to the smallest value.
Cell column_mode(const Table& table, std::size_t column);

/// Most frequent value; ties -> smallest by CellLess. Empty input -> Missing.
Cell mode_of(const std::vector<Cell>& values, std::size_t* count = nullptr);

}  // namespace llmforest
