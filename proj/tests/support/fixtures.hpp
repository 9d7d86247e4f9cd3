#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "llmforest/table.hpp"

namespace llmforest::testing {

inline Cell num(double v) { return Cell{v}; }
inline Cell cat(std::string s) { return Cell{std::move(s)}; }
inline const Cell kMissing = Cell{Missing{}};

inline Table make_table(const std::vector<std::pair<std::string, FeatureKind>>& columns,
                        const std::vector<std::vector<Cell>>& rows,
                        std::optional<std::size_t> label = std::nullopt) {
  std::vector<FeatureSpec> specs;
  for (const auto& [name, kind] : columns) {
    FeatureSpec s;
    s.name = name;
    s.kind = kind;
    specs.push_back(s);
  }
  std::vector<Cell> cells;
  for (const auto& r : rows) cells.insert(cells.end(), r.begin(), r.end());
  return Table(std::move(specs), std::move(cells), label);
}

/// Random mixed-kind table: column j cycles categorical, normal, empirical,
/// numeric_binned; categorical/empirical draw from small string domains,
/// normal/numeric_binned from integer-valued Gaussians. No missing cells
/// unless `missing_rate` > 0 (at least one observed cell per column kept).
inline Table random_table(std::size_t rows, std::size_t cols, std::uint64_t seed, double missing_rate = 0.0,
                          bool with_continuous = true) {
  std::mt19937_64 gen(seed);
  std::vector<std::pair<std::string, FeatureKind>> columns;
  for (std::size_t j = 0; j < cols; ++j) {
    FeatureKind kind = FeatureKind::categorical;
    if (with_continuous) {
      switch (j % 4) {
        case 0: kind = FeatureKind::categorical; break;
        case 1: kind = FeatureKind::normal; break;
        case 2: kind = FeatureKind::empirical; break;
        default: kind = FeatureKind::numeric_binned; break;
      }
    } else if (j % 2 == 1) {
      kind = FeatureKind::empirical;
    }
    columns.emplace_back("c" + std::to_string(j), kind);
  }
  std::vector<std::vector<Cell>> data(rows, std::vector<Cell>(cols));
  std::uniform_int_distribution<int> small(0, 3);
  std::normal_distribution<double> gauss(50.0, 10.0);
  std::bernoulli_distribution drop(missing_rate);
  for (std::size_t j = 0; j < cols; ++j) {
    const bool continuous = columns[j].second == FeatureKind::normal || columns[j].second == FeatureKind::numeric_binned;
    for (std::size_t r = 0; r < rows; ++r) {
      if (continuous)
        data[r][j] = std::round(gauss(gen));
      else
        data[r][j] = "v" + std::to_string(small(gen));
    }
    // Two distinct values guarantee a non-degenerate column.
    if (continuous) {
      data[0][j] = 10.0;
      data[1][j] = 90.0;
    }
    for (std::size_t r = 2; r < rows; ++r)
      if (drop(gen)) data[r][j] = Missing{};
  }
  return make_table(columns, data);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("llmforest_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace llmforest::testing
