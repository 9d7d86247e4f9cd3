#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "llmforest/table.hpp"

namespace llmforest {

struct KnnConfig {
  enum class Distance { hamming_overlap };
  std::size_t k = 5;
  Distance distance = Distance::hamming_overlap;

  /// 1 <= k <= rows - 1.
  void validate(std::size_t rows) const;
};

/// Missing cells take the column mode (ties -> smallest).
Table impute_mode(const Table& table);

/// Numeric non-categorical columns take the observed mean, rounded half-up
/// when every observed value is an integer; other columns take the mode.
Table impute_mean(const Table& table);

/// Per-cell comparison keys: numbers rounded to 4 significant digits, then
/// numbered per column; -1 for missing cells. Row-major.
std::vector<std::int32_t> match_keys(const Table& table);

/// Mismatches over the features observed in both rows, divided by their
/// count; 1 when the rows share no observed feature.
double overlap_hamming(const std::int32_t* a, const std::int32_t* b, std::size_t d);
double overlap_hamming(const Table& table, std::size_t u, std::size_t v);

/// For each missing cell, the k nearest rows that observe the feature
/// (distance ties -> lower row index) donate their mode, or their mean for
/// continuous columns.
Table impute_knn(const Table& table, const KnnConfig& config, std::size_t workers = 1);

/// Full pairwise distances, then the q nearest other rows of every row,
/// ordered by (distance, row index).
std::vector<std::vector<std::size_t>> knn_neighbor_search(const Table& table, std::size_t q,
                                                          std::size_t workers = 1);

}  // namespace llmforest
