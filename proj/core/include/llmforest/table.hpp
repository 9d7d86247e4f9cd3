#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "llmforest/cell.hpp"

namespace llmforest {

enum class FeatureKind { categorical, normal, empirical, numeric_binned };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view text);

/// Per-column metadata. `distinct_values` is R_j, sorted by CellLess.
struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::categorical;
  std::string description;
  std::vector<Cell> distinct_values;
  std::optional<double> mean;    // normal and numeric_binned only
  std::optional<double> stddev;  // normal and numeric_binned only
  bool numeric = false;          // every observed cell is a Number
  std::size_t observed = 0;

  bool continuous() const {
    return kind == FeatureKind::normal || kind == FeatureKind::numeric_binned;
  }
  /// Index of `value` in distinct_values, or nullopt.
  std::optional<std::size_t> code_of(const Cell& value) const;
};

struct IngestWarning {
  std::size_t column = 0;
  std::string message;
};

/// Immutable n x d table of cells with derived missingness mask and
/// per-column statistics. Column specs are recomputed from the observed cells
/// on every construction.
class Table {
 public:
  Table() = default;

  /// `cells` is row-major with columns.size() entries per row. Only name,
  /// kind and description of each column spec are read; the rest is derived.
  Table(std::vector<FeatureSpec> columns, std::vector<Cell> cells,
        std::optional<std::size_t> label_column = std::nullopt,
        std::string description = {});

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return columns_.size(); }

  const Cell& cell(std::size_t row, std::size_t col) const { return cells_[row * cols() + col]; }
  bool missing(std::size_t row, std::size_t col) const { return mask_[row * cols() + col] != 0; }
  /// Index into column(col).distinct_values, or -1 when missing.
  std::int32_t code(std::size_t row, std::size_t col) const { return codes_[row * cols() + col]; }
  std::span<const Cell> row(std::size_t r) const {
    return {cells_.data() + r * cols(), cols()};
  }

  const FeatureSpec& column(std::size_t j) const { return columns_[j]; }
  const std::vector<FeatureSpec>& columns() const { return columns_; }
  std::optional<std::size_t> column_index(std::string_view name) const;
  std::optional<std::size_t> label_column() const { return label_; }
  const std::string& description() const { return description_; }
  const std::vector<IngestWarning>& warnings() const { return warnings_; }

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  std::size_t missing_count() const;

  /// Same schema (names, kinds, descriptions, label), new cells.
  Table with_cells(std::vector<Cell> cells) const;
  /// Rows in the given order.
  Table select_rows(std::span<const std::size_t> rows) const;

 private:
  void rebuild();

  std::vector<FeatureSpec> columns_;
  std::vector<Cell> cells_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::int32_t> codes_;
  std::optional<std::size_t> label_;
  std::string description_;
  std::vector<IngestWarning> warnings_;
  std::size_t rows_ = 0;
};

/// Ground-truth values of injected missing cells, keyed by (row, column).
class ShadowTruth {
 public:
  using Key = std::pair<std::size_t, std::size_t>;

  void set(std::size_t row, std::size_t col, Cell value) { values_[{row, col}] = std::move(value); }
  const Cell* find(std::size_t row, std::size_t col) const;
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const std::map<Key, Cell>& entries() const { return values_; }

  /// Entries of `other` override existing ones.
  void merge(const ShadowTruth& other);
  /// Keeps entries for `rows` and renumbers them to their position in `rows`.
  ShadowTruth select_rows(std::span<const std::size_t> rows) const;

 private:
  std::map<Key, Cell> values_;
};

/// Restores every ground-truth value into the table.
Table restore_truth(const Table& table, const ShadowTruth& truth);

}  // namespace llmforest
