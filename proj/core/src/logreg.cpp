#include "llmforest/logreg.hpp"

#include <algorithm>
#include <cmath>

#include "llmforest/errors.hpp"

namespace llmforest {

FeatureEncoder::FeatureEncoder(const Table& train, std::size_t label_column) {
  for (std::size_t j = 0; j < train.cols(); ++j) {
    if (j == label_column) continue;
    const auto& spec = train.column(j);
    Column col;
    col.source = j;
    col.offset = width_;
    col.continuous = spec.continuous() && spec.numeric;
    if (col.continuous) {
      col.mean = spec.mean.value_or(0.0);
      const double sd = spec.stddev.value_or(0.0);
      col.scale = sd > 0.0 ? sd : 1.0;
      width_ += 1;
    } else {
      col.values = spec.distinct_values;
      width_ += col.values.size();
    }
    columns_.push_back(std::move(col));
  }
}

std::vector<double> FeatureEncoder::encode(std::span<const Cell> row) const {
  std::vector<double> x(width_, 0.0);
  for (const auto& col : columns_) {
    const Cell& c = row[col.source];
    if (is_missing(c)) continue;
    if (col.continuous) {
      if (is_number(c)) x[col.offset] = (as_number(c) - col.mean) / col.scale;
      continue;
    }
    auto it = std::lower_bound(col.values.begin(), col.values.end(), c, CellLess{});
    if (it != col.values.end() && compare_cells(*it, c) == 0)
      x[col.offset + static_cast<std::size_t>(it - col.values.begin())] = 1.0;
  }
  return x;
}

namespace {

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

double LogisticModel::probability(std::span<const Cell> row) const {
  const auto x = encoder_.encode(row);
  double z = bias_;
  for (std::size_t k = 0; k < x.size(); ++k) z += weights_[k] * x[k];
  return sigmoid(z);
}

double LogisticModel::accuracy(const Table& table) const {
  std::size_t total = 0, correct = 0;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const Cell& y = table.cell(r, label_);
    if (is_missing(y)) continue;
    ++total;
    const bool predicted = probability(table.row(r)) >= 0.5;
    correct += predicted == (compare_cells(y, positive_) == 0);
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

LogisticModel train_logreg(const Table& train, std::size_t label_column, const LogregConfig& config) {
  const auto& labels = train.column(label_column).distinct_values;
  if (labels.size() != 2)
    throw DataError("logistic regression needs a binary label; " + train.column(label_column).name + " has " +
                    std::to_string(labels.size()) + " distinct values");

  LogisticModel model;
  model.encoder_ = FeatureEncoder(train, label_column);
  model.label_ = label_column;
  model.positive_ = labels[1];

  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (std::size_t r = 0; r < train.rows(); ++r) {
    const Cell& y = train.cell(r, label_column);
    if (is_missing(y)) continue;
    xs.push_back(model.encoder_.encode(train.row(r)));
    ys.push_back(compare_cells(y, model.positive_) == 0 ? 1.0 : 0.0);
  }
  if (xs.empty()) throw DataError("no training rows with an observed label");

  const std::size_t w = model.encoder_.width();
  const double n = static_cast<double>(xs.size());
  model.weights_.assign(w, 0.0);
  std::vector<double> grad(w);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0, loss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double z = model.bias_;
      for (std::size_t k = 0; k < w; ++k) z += model.weights_[k] * xs[i][k];
      const double p = sigmoid(z);
      // log(1 + e^z) - y z, computed stably
      loss += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - ys[i] * z;
      const double err = p - ys[i];
      grad_bias += err;
      for (std::size_t k = 0; k < w; ++k) grad[k] += err * xs[i][k];
    }
    double penalty = 0.0;
    for (double v : model.weights_) penalty += v * v;
    model.loss_.push_back(loss / n + 0.5 * config.l2 * penalty);
    for (std::size_t k = 0; k < w; ++k)
      model.weights_[k] -= config.learning_rate * (grad[k] / n + config.l2 * model.weights_[k]);
    model.bias_ -= config.learning_rate * grad_bias / n;
  }
  return model;
}

}  // namespace llmforest
