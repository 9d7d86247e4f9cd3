#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "llmforest/table.hpp"

namespace llmforest {

struct LogregConfig {
  std::size_t epochs = 500;
  double learning_rate = 0.1;
  double l2 = 0.0;
};

/// Design-matrix encoding fitted on a training table: continuous columns are
/// standardized, every other column is one-hot over its training values.
/// Missing or unseen values encode as zeros.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  FeatureEncoder(const Table& train, std::size_t label_column);
  std::size_t width() const { return width_; }
  std::vector<double> encode(std::span<const Cell> row) const;

 private:
  struct Column {
    std::size_t source = 0;
    std::size_t offset = 0;
    bool continuous = false;
    double mean = 0.0;
    double scale = 1.0;
    std::vector<Cell> values;  // one-hot levels, sorted
  };
  std::vector<Column> columns_;
  std::size_t width_ = 0;
};

class LogisticModel {
 public:
  double probability(std::span<const Cell> row) const;
  /// Fraction of rows with an observed label that are classified correctly.
  double accuracy(const Table& table) const;
  const std::vector<double>& loss_history() const { return loss_; }
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  friend LogisticModel train_logreg(const Table&, std::size_t, const LogregConfig&);
  FeatureEncoder encoder_;
  std::size_t label_ = 0;
  Cell positive_;
  std::vector<double> weights_;
  double bias_ = 0.0;
  std::vector<double> loss_;  // mean log-loss before each epoch's update
};

/// Full-batch gradient descent from zero weights. The label must take
/// exactly two observed values; the larger one is the positive class.
LogisticModel train_logreg(const Table& train, std::size_t label_column, const LogregConfig& config = {});

}  // namespace llmforest
