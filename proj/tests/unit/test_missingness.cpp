#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "llmforest/errors.hpp"
#include "llmforest/missingness.hpp"

using namespace llmforest;
using namespace llmforest::testing;

namespace {

Table labelled_table(std::size_t rows) {
  std::vector<std::vector<Cell>> data;
  for (std::size_t r = 0; r < rows; ++r)
    data.push_back({cat("v" + std::to_string(r % 3)), num(static_cast<double>(r % 7)), num(static_cast<double>(r))});
  return make_table({{"a", FeatureKind::categorical}, {"b", FeatureKind::empirical}, {"y", FeatureKind::normal}},
                    data, 2);
}

}  // namespace

TEST(Mcar, MasksExactFloorCountPerColumn) {
  const Table t = random_table(1000, 22, 3);
  const auto m = apply_mcar(t, 0.4, 11);
  EXPECT_EQ(m.truth.size(), 8800u);
  for (std::size_t j = 0; j < t.cols(); ++j) {
    std::size_t hidden = 0;
    for (std::size_t r = 0; r < t.rows(); ++r) hidden += m.table.missing(r, j);
    EXPECT_EQ(hidden, 400u) << "column " << j;
  }
}

TEST(Mcar, CountsOnlyObservedCellsAndTruthMatchesSource) {
  const Table t = random_table(50, 6, 5, 0.2);
  const auto m = apply_mcar(t, 0.4, 2);
  for (std::size_t j = 0; j < t.cols(); ++j) {
    std::size_t newly = 0;
    for (std::size_t r = 0; r < t.rows(); ++r) newly += m.table.missing(r, j) && !t.missing(r, j);
    EXPECT_EQ(newly, static_cast<std::size_t>(0.4 * static_cast<double>(t.column(j).observed) + 1e-9));
  }
  for (const auto& [key, value] : m.truth.entries())
    EXPECT_TRUE(compare_cells(value, t.cell(key.first, key.second)) == 0);
}

TEST(Mcar, SameSeedSameMask) {
  const Table t = random_table(40, 5, 1);
  EXPECT_EQ(apply_mcar(t, 0.3, 9).table.mask(), apply_mcar(t, 0.3, 9).table.mask());
  EXPECT_NE(apply_mcar(t, 0.3, 9).table.mask(), apply_mcar(t, 0.3, 10).table.mask());
}

TEST(Mcar, RateOutsideUnitIntervalIsRejected) {
  const Table t = random_table(10, 2, 1);
  EXPECT_THROW(apply_mcar(t, 1.0, 1), ConfigError);
  EXPECT_THROW(apply_mcar(t, -0.1, 1), ConfigError);
}

TEST(Mar, MasksOnlyRowsAtOrBelowLabelCutoff) {
  const Table t = labelled_table(100);
  const auto m = apply_mar(t, 0.3, 0.5, 4);
  // Labels are 0..99; the lower 30% are 0..29.
  std::size_t pool = 0;
  for (std::size_t r = 0; r < 30; ++r) pool += 2;
  EXPECT_EQ(m.truth.size(), pool / 2);
  for (const auto& [key, value] : m.truth.entries()) {
    EXPECT_LT(key.first, 30u);
    EXPECT_NE(key.second, 2u);  // label column is never masked
  }
}

TEST(Mar, NeedsLabelColumn) {
  const Table t = random_table(10, 2, 1);
  EXPECT_THROW(apply_mar(t, 0.3, 0.4, 1), ConfigError);
}

TEST(Mnar, SelfMaskingRateOnAllOnesColumn) {
  std::vector<std::vector<Cell>> data(10000, {num(1)});
  // A second distinct value keeps the column binary while all 10,000 cells
  // under test are '1'.
  data.push_back({num(0)});
  const Table t = make_table({{"flag", FeatureKind::categorical}}, data);
  const auto m = apply_mnar(t, 17);
  std::size_t hidden = 0;
  for (std::size_t r = 0; r < 10000; ++r) hidden += m.table.missing(r, 0);
  EXPECT_NEAR(static_cast<double>(hidden) / 10000.0, 0.30, 0.02);
  EXPECT_FALSE(m.table.missing(10000, 0));
}

TEST(Mnar, CrossFeatureMaskingUsesNextColumnZeros) {
  std::vector<std::vector<Cell>> data;
  for (int r = 0; r < 4000; ++r) data.push_back({num(0), num(r % 2)});
  const Table t = make_table({{"a", FeatureKind::categorical}, {"b", FeatureKind::categorical}}, data);
  MnarOptions opts;
  opts.self_probability = 0.0;
  const auto m = apply_mnar(t, 5, opts);
  std::size_t hidden_when_zero = 0, hidden_when_one = 0;
  for (int r = 0; r < 4000; ++r) {
    if (!m.table.missing(static_cast<std::size_t>(r), 0)) continue;
    (r % 2 == 0 ? hidden_when_zero : hidden_when_one)++;
  }
  EXPECT_EQ(hidden_when_one, 0u);
  EXPECT_NEAR(static_cast<double>(hidden_when_zero) / 2000.0, 0.4, 0.04);
}

TEST(Mnar, NonBinaryColumnsLoseTheirLowerTail) {
  std::vector<std::vector<Cell>> data;
  for (int r = 0; r < 10; ++r) data.push_back({num(r)});
  const Table t = make_table({{"x", FeatureKind::normal}}, data);
  const auto m = apply_mnar(t, 1);
  for (int r = 0; r < 10; ++r) EXPECT_EQ(m.table.missing(static_cast<std::size_t>(r), 0), r <= 2) << r;
}

TEST(Percentile, CutoffIsInclusiveFloorRank) {
  std::vector<std::vector<Cell>> data;
  for (int r = 0; r < 10; ++r) data.push_back({num(10 - r)});
  const Table t = make_table({{"x", FeatureKind::normal}}, data);
  EXPECT_EQ(as_number(*percentile_cutoff(t, 0, 0.3)), 3.0);
  EXPECT_FALSE(percentile_cutoff(t, 0, 0.05).has_value());
}

TEST(Split, PartitionsRowsDeterministically) {
  const Table t = random_table(25, 3, 2);
  const auto s = split(t, 0.8, 3);
  EXPECT_EQ(s.first.rows(), 20u);
  EXPECT_EQ(s.second.rows(), 5u);
  std::set<std::size_t> all(s.first_rows.begin(), s.first_rows.end());
  all.insert(s.second_rows.begin(), s.second_rows.end());
  EXPECT_EQ(all.size(), 25u);
  EXPECT_EQ(split(t, 0.8, 3).first_rows, s.first_rows);
  for (std::size_t i = 0; i < s.first_rows.size(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j)
      EXPECT_TRUE(compare_cells(s.first.cell(i, j), t.cell(s.first_rows[i], j)) == 0);
}
