#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "llmforest/table.hpp"

namespace llmforest {

/// Result of a masking pass: the masked table plus the values it hid.
struct MaskedTable {
  Table table;
  ShadowTruth truth;
};

/// Masks exactly floor(rate * observed_j) currently observed cells of every
/// column j, chosen uniformly at random.
MaskedTable apply_mcar(const Table& table, double rate, std::uint64_t seed);

/// Rows whose label lies within the lower `percentile` of the label column
/// lose floor(rate * pool) of their observed non-label cells, where pool is
/// the number of such cells over all qualifying rows.
MaskedTable apply_mar(const Table& table, double percentile, double rate, std::uint64_t seed);

struct MnarOptions {
  double self_probability = 0.3;    // P(mask | value == 1), binary columns
  double cross_probability = 0.4;   // P(mask | next column == 0), binary columns
  double percentile = 0.3;          // lower-tail cutoff, other columns
};

/// Binary columns: self-dependent and cross-feature masking. Other columns:
/// every cell at or below the column's lower-percentile cutoff is masked.
MaskedTable apply_mnar(const Table& table, std::uint64_t seed, const MnarOptions& options = {});

/// Largest value v such that cells <= v lie within the lower `fraction` of
/// the column's observed cells: sorted[floor(fraction * n) - 1]. nullopt when
/// floor(fraction * n) == 0.
std::optional<Cell> percentile_cutoff(const Table& table, std::size_t column, double fraction);

/// True when every observed cell of the column is the number 0 or 1.
bool is_binary_column(const Table& table, std::size_t column);

struct SplitResult {
  Table first;
  Table second;
  std::vector<std::size_t> first_rows;   // source row ids, in output order
  std::vector<std::size_t> second_rows;
};

/// Seeded shuffle, then the first floor(ratio * n) rows go to `first`.
SplitResult split(const Table& table, double ratio, std::uint64_t seed);

}  // namespace llmforest
