#include "llmforest/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "llmforest/errors.hpp"

namespace llmforest {

Cell mode_of(const std::vector<Cell>& values, std::size_t* count) {
  std::map<Cell, std::size_t, CellLess> counts;
  for (const auto& v : values)
    if (!is_missing(v)) ++counts[v];
  Cell best = Missing{};
  std::size_t best_count = 0;
  for (const auto& [value, c] : counts) {
    if (c > best_count) {  // strict: earlier (smaller) value wins ties
      best = value;
      best_count = c;
    }
  }
  if (count) *count = best_count;
  return best;
}

Cell column_mode(const Table& table, std::size_t column) {
  const auto& spec = table.column(column);
  if (spec.observed == 0) throw DataError("column '" + spec.name + "' has no observed cell");
  std::vector<std::size_t> counts(spec.distinct_values.size(), 0);
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const auto code = table.code(i, column);
    if (code >= 0) ++counts[static_cast<std::size_t>(code)];
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < counts.size(); ++k)
    if (counts[k] > counts[best]) best = k;
  return spec.distinct_values[best];
}

FeatureStats feature_stats(const Table& table) {
  const std::size_t n = table.rows();
  const std::size_t d = table.cols();
  FeatureStats stats;
  stats.columns.resize(d);

  // Numeric coding for correlations.
  std::vector<double> coded(n * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const auto& spec = table.column(j);
    if (spec.observed == 0) throw DataError("column '" + spec.name + "' is fully missing");
    ColumnStats& cs = stats.columns[j];
    cs.observed = spec.observed;

    std::vector<std::size_t> counts(spec.distinct_values.size(), 0);
    std::vector<std::int64_t> first_seen(spec.distinct_values.size(), -1);
    std::int64_t next_code = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto code = table.code(i, j);
      if (code < 0) continue;
      const auto k = static_cast<std::size_t>(code);
      ++counts[k];
      if (first_seen[k] < 0) first_seen[k] = next_code++;
      if (spec.numeric) {
        coded[i * d + j] = as_number(table.cell(i, j));
        sum += coded[i * d + j];
      } else {
        coded[i * d + j] = static_cast<double>(first_seen[k]);
      }
    }
    std::size_t best = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      cs.histogram.emplace_back(spec.distinct_values[k], counts[k]);
      if (counts[k] > counts[best]) best = k;
    }
    cs.mode = spec.distinct_values[best];
    cs.mode_count = counts[best];
    if (spec.numeric) {
      const double mean = sum / static_cast<double>(spec.observed);
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (!table.missing(i, j)) ss += (coded[i * d + j] - mean) * (coded[i * d + j] - mean);
      cs.mean = mean;
      cs.stddev = std::sqrt(ss / static_cast<double>(spec.observed));
    }
  }

  stats.correlation.assign(d * d, 0.0);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      std::size_t m = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (table.missing(i, a) || table.missing(i, b)) continue;
        const double x = coded[i * d + a];
        const double y = coded[i * d + b];
        sx += x;
        sy += y;
        ++m;
      }
      if (m < 2) continue;
      const double mx = sx / static_cast<double>(m);
      const double my = sy / static_cast<double>(m);
      for (std::size_t i = 0; i < n; ++i) {
        if (table.missing(i, a) || table.missing(i, b)) continue;
        const double x = coded[i * d + a] - mx;
        const double y = coded[i * d + b] - my;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
      }
      double r = 0.0;
      if (sxx > 0.0 && syy > 0.0) r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
      stats.correlation[a * d + b] = r;
      stats.correlation[b * d + a] = r;
    }
  }
  return stats;
}

}  // namespace llmforest
