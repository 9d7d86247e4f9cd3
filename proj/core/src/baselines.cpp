#include "llmforest/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "llmforest/errors.hpp"
#include "llmforest/parallel.hpp"
#include "llmforest/stats.hpp"

namespace llmforest {

void KnnConfig::validate(std::size_t rows) const {
  if (k < 1) throw ConfigError("knn k must be at least 1");
  if (rows == 0 || k > rows - 1)
    throw ConfigError("knn k=" + std::to_string(k) + " exceeds rows - 1 = " + std::to_string(rows ? rows - 1 : 0));
}

namespace {

void require_observed(const Table& table, std::size_t j) {
  if (table.column(j).observed == 0) throw DataError("column " + table.column(j).name + " has no observed cell");
}

}  // namespace

Table impute_mode(const Table& table) {
  std::vector<Cell> cells = table.cells();
  for (std::size_t j = 0; j < table.cols(); ++j) {
    bool any = false;
    for (std::size_t r = 0; r < table.rows() && !any; ++r) any = table.missing(r, j);
    if (!any) continue;
    require_observed(table, j);
    const Cell mode = column_mode(table, j);
    for (std::size_t r = 0; r < table.rows(); ++r)
      if (table.missing(r, j)) cells[r * table.cols() + j] = mode;
  }
  return table.with_cells(std::move(cells));
}

Table impute_mean(const Table& table) {
  std::vector<Cell> cells = table.cells();
  for (std::size_t j = 0; j < table.cols(); ++j) {
    bool any = false;
    for (std::size_t r = 0; r < table.rows() && !any; ++r) any = table.missing(r, j);
    if (!any) continue;
    require_observed(table, j);
    Cell fill;
    const auto& spec = table.column(j);
    if (spec.numeric && spec.kind != FeatureKind::categorical) {
      double sum = 0.0;
      std::size_t n = 0;
      bool integral = true;
      for (std::size_t r = 0; r < table.rows(); ++r) {
        if (table.missing(r, j)) continue;
        const double v = as_number(table.cell(r, j));
        sum += v;
        ++n;
        integral = integral && v == std::floor(v);
      }
      const double mean = sum / static_cast<double>(n);
      fill = integral ? std::floor(mean + 0.5) : mean;
    } else {
      fill = column_mode(table, j);
    }
    for (std::size_t r = 0; r < table.rows(); ++r)
      if (table.missing(r, j)) cells[r * table.cols() + j] = fill;
  }
  return table.with_cells(std::move(cells));
}

std::vector<std::int32_t> match_keys(const Table& table) {
  const std::size_t n = table.rows(), d = table.cols();
  std::vector<std::int32_t> keys(n * d, -1);
  for (std::size_t j = 0; j < d; ++j) {
    std::map<double, std::int32_t> ids;
    for (std::size_t r = 0; r < n; ++r) {
      if (table.missing(r, j)) continue;
      const Cell& c = table.cell(r, j);
      if (is_number(c)) {
        const auto [it, fresh] =
            ids.try_emplace(round_significant(as_number(c), 4), static_cast<std::int32_t>(ids.size()));
        keys[r * d + j] = it->second;
      } else {
        // Offset keeps category codes apart from rounded-number ids.
        keys[r * d + j] = table.code(r, j) + (1 << 24);
      }
    }
  }
  return keys;
}

double overlap_hamming(const std::int32_t* a, const std::int32_t* b, std::size_t d) {
  std::size_t overlap = 0, mismatch = 0;
  for (std::size_t j = 0; j < d; ++j) {
    if (a[j] < 0 || b[j] < 0) continue;
    ++overlap;
    mismatch += a[j] != b[j];
  }
  return overlap == 0 ? 1.0 : static_cast<double>(mismatch) / static_cast<double>(overlap);
}

double overlap_hamming(const Table& table, std::size_t u, std::size_t v) {
  const auto keys = match_keys(table);
  const std::size_t d = table.cols();
  return overlap_hamming(keys.data() + u * d, keys.data() + v * d, d);
}

Table impute_knn(const Table& table, const KnnConfig& config, std::size_t workers) {
  config.validate(table.rows());
  const std::size_t n = table.rows(), d = table.cols();
  for (std::size_t j = 0; j < d; ++j) {
    bool any = false;
    for (std::size_t r = 0; r < n && !any; ++r) any = table.missing(r, j);
    if (any) require_observed(table, j);
  }
  const auto keys = match_keys(table);
  std::vector<Cell> cells = table.cells();

  parallel_for(n, workers, [&](std::size_t r) {
    bool any = false;
    for (std::size_t j = 0; j < d && !any; ++j) any = table.missing(r, j);
    if (!any) return;

    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(n - 1);
    for (std::size_t v = 0; v < n; ++v)
      if (v != r) order.emplace_back(overlap_hamming(keys.data() + r * d, keys.data() + v * d, d), v);
    std::sort(order.begin(), order.end());

    for (std::size_t j = 0; j < d; ++j) {
      if (!table.missing(r, j)) continue;
      std::vector<Cell> donors;
      for (const auto& [dist, v] : order) {
        if (table.missing(v, j)) continue;
        donors.push_back(table.cell(v, j));
        if (donors.size() == config.k) break;
      }
      Cell fill;
      if (table.column(j).continuous()) {
        double sum = 0.0;
        for (const auto& c : donors) sum += as_number(c);
        fill = sum / static_cast<double>(donors.size());
      } else {
        fill = mode_of(donors);
      }
      cells[r * d + j] = std::move(fill);
    }
  });
  return table.with_cells(std::move(cells));
}

std::vector<std::vector<std::size_t>> knn_neighbor_search(const Table& table, std::size_t q,
                                                          std::size_t workers) {
  const std::size_t n = table.rows(), d = table.cols();
  const auto keys = match_keys(table);
  std::vector<std::vector<std::size_t>> out(n);
  parallel_for(n, workers, [&](std::size_t r) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(n);
    for (std::size_t v = 0; v < n; ++v)
      if (v != r) dist.emplace_back(overlap_hamming(keys.data() + r * d, keys.data() + v * d, d), v);
    const std::size_t keep = std::min(q, dist.size());
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(keep), dist.end());
    dist.resize(keep);
    std::sort(dist.begin(), dist.end());
    out[r].reserve(keep);
    for (const auto& p : dist) out[r].push_back(p.second);
  });
  return out;
}

}  // namespace llmforest
