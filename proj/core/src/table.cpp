#include "llmforest/table.hpp"

#include <algorithm>
#include <cmath>

#include "llmforest/errors.hpp"

namespace llmforest {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::categorical: return "categorical";
    case FeatureKind::normal: return "normal";
    case FeatureKind::empirical: return "empirical";
    case FeatureKind::numeric_binned: return "numeric-binned";
  }
  return "categorical";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "categorical") return FeatureKind::categorical;
  if (text == "normal") return FeatureKind::normal;
  if (text == "empirical") return FeatureKind::empirical;
  if (text == "numeric-binned" || text == "numeric_binned") return FeatureKind::numeric_binned;
  throw ConfigError("unknown feature kind '" + std::string(text) + "'");
}

std::optional<std::size_t> FeatureSpec::code_of(const Cell& value) const {
  auto it = std::lower_bound(distinct_values.begin(), distinct_values.end(), value, CellLess{});
  if (it == distinct_values.end() || compare_cells(*it, value) != 0) return std::nullopt;
  return static_cast<std::size_t>(it - distinct_values.begin());
}

Table::Table(std::vector<FeatureSpec> columns, std::vector<Cell> cells,
             std::optional<std::size_t> label_column, std::string description)
    : columns_(std::move(columns)),
      cells_(std::move(cells)),
      label_(label_column),
      description_(std::move(description)) {
  rebuild();
}

void Table::rebuild() {
  const std::size_t d = columns_.size();
  if (d == 0) {
    if (!cells_.empty()) throw DataError("cells given for a table without columns");
    rows_ = 0;
    return;
  }
  if (cells_.size() % d != 0) throw DataError("cell count is not a multiple of the column count");
  if (label_ && *label_ >= d) throw DataError("label column index out of range");
  rows_ = cells_.size() / d;
  mask_.assign(cells_.size(), 0);
  codes_.assign(cells_.size(), -1);
  warnings_.clear();

  for (std::size_t j = 0; j < d; ++j) {
    FeatureSpec& spec = columns_[j];
    std::size_t numbers = 0;
    std::size_t categories = 0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const Cell& c = cells_[i * d + j];
      if (is_number(c)) {
        if (!std::isfinite(as_number(c)))
          throw DataError("non-finite number in column '" + spec.name + "'");
        ++numbers;
      } else if (is_category(c)) {
        ++categories;
      }
    }
    if (spec.continuous() && categories > 0)
      throw DataError("non-numeric cell in numeric column '" + spec.name + "'");
    if (categories > 0 && numbers > 0) {
      for (std::size_t i = 0; i < rows_; ++i) {
        Cell& c = cells_[i * d + j];
        if (is_number(c)) c = serialize_cell(c);
      }
      numbers = 0;
    }
    spec.observed = numbers + categories;
    spec.numeric = spec.observed > 0 && categories == 0;

    std::vector<Cell> values;
    values.reserve(spec.observed);
    double sum = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const Cell& c = cells_[i * d + j];
      if (is_missing(c)) {
        mask_[i * d + j] = 1;
        continue;
      }
      values.push_back(c);
      if (is_number(c)) sum += as_number(c);
    }
    std::sort(values.begin(), values.end(), CellLess{});
    values.erase(std::unique(values.begin(), values.end(),
                             [](const Cell& a, const Cell& b) { return compare_cells(a, b) == 0; }),
                 values.end());
    spec.distinct_values = std::move(values);

    spec.mean.reset();
    spec.stddev.reset();
    if (spec.continuous() && spec.observed > 0) {
      const double mean = sum / static_cast<double>(spec.observed);
      double ss = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) {
        const Cell& c = cells_[i * d + j];
        if (is_number(c)) ss += (as_number(c) - mean) * (as_number(c) - mean);
      }
      const double sd = std::sqrt(ss / static_cast<double>(spec.observed));
      if (sd > 0.0) {
        spec.mean = mean;
        spec.stddev = sd;
      } else {
        warnings_.push_back({j, "column '" + spec.name + "' declared " +
                                    std::string(to_string(spec.kind)) +
                                    " has zero variance; treated as categorical"});
        spec.kind = FeatureKind::categorical;
      }
    }

    for (std::size_t i = 0; i < rows_; ++i) {
      const Cell& c = cells_[i * d + j];
      if (is_missing(c)) continue;
      codes_[i * d + j] = static_cast<std::int32_t>(*spec.code_of(c));
    }
  }
}

std::optional<std::size_t> Table::column_index(std::string_view name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j)
    if (columns_[j].name == name) return j;
  return std::nullopt;
}

std::size_t Table::missing_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

Table Table::with_cells(std::vector<Cell> cells) const {
  return Table(columns_, std::move(cells), label_, description_);
}

Table Table::select_rows(std::span<const std::size_t> rows) const {
  std::vector<Cell> out;
  out.reserve(rows.size() * cols());
  for (std::size_t r : rows) {
    if (r >= rows_) throw DataError("row index out of range");
    auto src = row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  return with_cells(std::move(out));
}

const Cell* ShadowTruth::find(std::size_t row, std::size_t col) const {
  auto it = values_.find({row, col});
  return it == values_.end() ? nullptr : &it->second;
}

void ShadowTruth::merge(const ShadowTruth& other) {
  for (const auto& [key, value] : other.values_) values_[key] = value;
}

ShadowTruth ShadowTruth::select_rows(std::span<const std::size_t> rows) const {
  ShadowTruth out;
  for (std::size_t pos = 0; pos < rows.size(); ++pos) {
    auto it = values_.lower_bound({rows[pos], 0});
    for (; it != values_.end() && it->first.first == rows[pos]; ++it)
      out.set(pos, it->first.second, it->second);
  }
  return out;
}

Table restore_truth(const Table& table, const ShadowTruth& truth) {
  std::vector<Cell> cells = table.cells();
  for (const auto& [key, value] : truth.entries()) {
    if (key.first >= table.rows() || key.second >= table.cols())
      throw DataError("shadow truth entry outside the table");
    cells[key.first * table.cols() + key.second] = value;
  }
  return table.with_cells(std::move(cells));
}

}  // namespace llmforest
