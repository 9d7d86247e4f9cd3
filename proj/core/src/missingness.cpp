#include "llmforest/missingness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "llmforest/errors.hpp"
#include "llmforest/rng.hpp"

namespace llmforest {

namespace {

void check_fraction(double v, const char* what, bool allow_zero) {
  if (!(v >= 0.0 && v < 1.0) || (!allow_zero && v == 0.0))
    throw ConfigError(std::string(what) + " must lie in " + (allow_zero ? "[0, 1)" : "(0, 1)") +
                      ", got " + std::to_string(v));
}

std::size_t floor_count(double fraction, std::size_t n) {
  // Guard against 0.4 * 1000 evaluating to 399.99999.
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

bool cell_is_value(const Cell& c, double v) {
  if (is_number(c)) return as_number(c) == v;
  if (is_category(c)) {
    double x = 0.0;
    return parse_number(as_category(c), x) && x == v;
  }
  return false;
}

MaskedTable finish(const Table& table, std::vector<Cell> cells, ShadowTruth truth) {
  return {table.with_cells(std::move(cells)), std::move(truth)};
}

}  // namespace

MaskedTable apply_mcar(const Table& table, double rate, std::uint64_t seed) {
  check_fraction(rate, "MCAR rate", true);
  Rng rng(seed);
  std::vector<Cell> cells = table.cells();
  ShadowTruth truth;
  const std::size_t d = table.cols();
  std::vector<std::size_t> observed;
  for (std::size_t j = 0; j < d; ++j) {
    observed.clear();
    for (std::size_t i = 0; i < table.rows(); ++i)
      if (!table.missing(i, j)) observed.push_back(i);
    const std::size_t k = floor_count(rate, observed.size());
    // Partial Fisher-Yates: the first k positions become a uniform k-subset.
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t pick = t + rng.index(observed.size() - t);
      std::swap(observed[t], observed[pick]);
      const std::size_t i = observed[t];
      truth.set(i, j, cells[i * d + j]);
      cells[i * d + j] = Missing{};
    }
  }
  return finish(table, std::move(cells), std::move(truth));
}

std::optional<Cell> percentile_cutoff(const Table& table, std::size_t column, double fraction) {
  std::vector<Cell> values;
  for (std::size_t i = 0; i < table.rows(); ++i)
    if (!table.missing(i, column)) values.push_back(table.cell(i, column));
  const std::size_t k = floor_count(fraction, values.size());
  if (k == 0) return std::nullopt;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1), values.end(),
                   CellLess{});
  return values[k - 1];
}

MaskedTable apply_mar(const Table& table, double percentile, double rate, std::uint64_t seed) {
  if (!table.label_column()) throw ConfigError("MAR masking needs a label column");
  check_fraction(percentile, "MAR percentile", false);
  check_fraction(rate, "MAR rate", false);
  const std::size_t label = *table.label_column();
  const std::size_t d = table.cols();
  std::vector<Cell> cells = table.cells();
  ShadowTruth truth;

  auto cutoff = percentile_cutoff(table, label, percentile);
  if (!cutoff) return finish(table, std::move(cells), std::move(truth));

  std::vector<std::size_t> pool;  // flattened cell positions
  for (std::size_t i = 0; i < table.rows(); ++i) {
    if (table.missing(i, label) || compare_cells(table.cell(i, label), *cutoff) > 0) continue;
    for (std::size_t j = 0; j < d; ++j)
      if (j != label && !table.missing(i, j)) pool.push_back(i * d + j);
  }
  Rng rng(seed);
  const std::size_t k = floor_count(rate, pool.size());
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t pick = t + rng.index(pool.size() - t);
    std::swap(pool[t], pool[pick]);
    const std::size_t pos = pool[t];
    truth.set(pos / d, pos % d, cells[pos]);
    cells[pos] = Missing{};
  }
  return finish(table, std::move(cells), std::move(truth));
}

bool is_binary_column(const Table& table, std::size_t column) {
  const auto& spec = table.column(column);
  if (spec.observed == 0) return false;
  return std::all_of(spec.distinct_values.begin(), spec.distinct_values.end(),
                     [](const Cell& c) { return cell_is_value(c, 0.0) || cell_is_value(c, 1.0); });
}

MaskedTable apply_mnar(const Table& table, std::uint64_t seed, const MnarOptions& options) {
  const std::size_t d = table.cols();
  std::vector<Cell> cells = table.cells();
  ShadowTruth truth;
  Rng rng(seed);
  auto hide = [&](std::size_t i, std::size_t j) {
    if (is_missing(cells[i * d + j])) return;
    truth.set(i, j, cells[i * d + j]);
    cells[i * d + j] = Missing{};
  };

  for (std::size_t j = 0; j < d; ++j) {
    if (is_binary_column(table, j)) {
      const bool has_next = j + 1 < d;
      for (std::size_t i = 0; i < table.rows(); ++i) {
        if (table.missing(i, j)) continue;
        // Both draws are always taken so the stream does not depend on values.
        const bool self = rng.bernoulli(options.self_probability);
        const bool cross = rng.bernoulli(options.cross_probability);
        if (cell_is_value(table.cell(i, j), 1.0) && self) hide(i, j);
        if (has_next && cell_is_value(table.cell(i, j + 1), 0.0) && cross) hide(i, j);
      }
    } else {
      auto cutoff = percentile_cutoff(table, j, options.percentile);
      if (!cutoff) continue;
      for (std::size_t i = 0; i < table.rows(); ++i)
        if (!table.missing(i, j) && compare_cells(table.cell(i, j), *cutoff) <= 0) hide(i, j);
    }
  }
  return finish(table, std::move(cells), std::move(truth));
}

SplitResult split(const Table& table, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  if (table.rows() < 2) throw DataError("cannot split a table with fewer than 2 rows");
  std::vector<std::size_t> order(table.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  const std::size_t k = floor_count(ratio, table.rows());
  SplitResult out;
  out.first_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  out.second_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  out.first = table.select_rows(out.first_rows);
  out.second = table.select_rows(out.second_rows);
  return out;
}

}  // namespace llmforest
