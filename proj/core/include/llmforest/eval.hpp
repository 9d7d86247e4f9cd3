#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "llmforest/forest.hpp"
#include "llmforest/table.hpp"

namespace llmforest {

/// Decimal places of a numeric column's observed values (0 for integer
/// columns), used to round before comparing. Capped at 6.
int observed_decimals(const Table& reference, std::size_t column);

/// Equality after rounding both numbers to `decimals` places; other cells
/// compare by their serialized text. A number never matches a category.
bool cells_match(const Cell& imputed, const Cell& truth, int decimals);

struct AccuracyCount {
  std::size_t cells = 0;
  std::size_t correct = 0;
  double accuracy() const { return cells ? static_cast<double>(correct) / static_cast<double>(cells) : 0.0; }
};

struct DownstreamResult {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct EvalReport {
  std::string method;
  AccuracyCount overall;
  std::vector<std::pair<std::string, AccuracyCount>> per_feature;  // schema order, masked features only
  std::map<Confidence, AccuracyCount> by_confidence;              // empty buckets absent
  std::optional<double> unimputed_rate;  // tree-cell slots without an answer
  std::optional<double> invalid_rate;    // tree-cell slots with an invalid answer
  std::optional<std::size_t> fallback_cells;
  std::optional<DownstreamResult> downstream;

  std::string to_json() const;
  /// Aligned-column text table.
  std::string to_text() const;
};

/// Fraction of masked cells of `masked` whose imputed value matches the
/// shadow truth. Throws DataError when a masked cell has no truth entry.
double imputation_accuracy(const Table& imputed, const ShadowTruth& truth, const Table& masked);

/// Accuracy within each aggregate-confidence bucket over LLM-voted cells.
std::map<Confidence, AccuracyCount> accuracy_by_confidence(std::span<const CellLedger> ledger,
                                                           const Table& imputed, const ShadowTruth& truth,
                                                           const Table& masked);

/// Overall and per-feature accuracy, plus ledger-derived fields when a
/// ledger is given.
EvalReport evaluate(const std::string& method, const Table& imputed, const ShadowTruth& truth,
                    const Table& masked, std::span<const CellLedger> ledger = {}, std::size_t trees = 0);

}  // namespace llmforest
