#include "llmforest/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "llmforest/errors.hpp"

namespace llmforest {

int observed_decimals(const Table& reference, std::size_t column) {
  int decimals = 0;
  for (std::size_t r = 0; r < reference.rows(); ++r) {
    const Cell& c = reference.cell(r, column);
    if (!is_number(c)) continue;
    const std::string text = serialize_cell(c);
    if (text.find_first_of("eE") != std::string::npos) return 6;
    const auto dot = text.find('.');
    if (dot != std::string::npos) decimals = std::max(decimals, static_cast<int>(text.size() - dot - 1));
    if (decimals >= 6) return 6;
  }
  return decimals;
}

bool cells_match(const Cell& imputed, const Cell& truth, int decimals) {
  if (is_missing(imputed) || is_missing(truth)) return false;
  if (is_number(imputed) && is_number(truth)) {
    const double scale = std::pow(10.0, decimals);
    return std::round(as_number(imputed) * scale) == std::round(as_number(truth) * scale);
  }
  if (is_number(imputed) != is_number(truth)) return false;
  return serialize_cell(imputed) == serialize_cell(truth);
}

namespace {

const Cell& truth_of(const ShadowTruth& truth, const Table& masked, std::size_t r, std::size_t j) {
  const Cell* t = truth.find(r, j);
  if (!t)
    throw DataError("no ground truth for masked cell (row " + std::to_string(r) + ", " + masked.column(j).name + ")");
  return *t;
}

}  // namespace

double imputation_accuracy(const Table& imputed, const ShadowTruth& truth, const Table& masked) {
  return evaluate("", imputed, truth, masked).overall.accuracy();
}

std::map<Confidence, AccuracyCount> accuracy_by_confidence(std::span<const CellLedger> ledger,
                                                           const Table& imputed, const ShadowTruth& truth,
                                                           const Table& masked) {
  std::vector<int> decimals(masked.cols());
  for (std::size_t j = 0; j < masked.cols(); ++j) decimals[j] = observed_decimals(masked, j);
  std::map<Confidence, AccuracyCount> buckets;
  for (const auto& c : ledger) {
    if (!c.confidence) continue;
    auto& b = buckets[*c.confidence];
    ++b.cells;
    b.correct += cells_match(imputed.cell(c.row, c.column), truth_of(truth, masked, c.row, c.column),
                             decimals[c.column]);
  }
  return buckets;
}

EvalReport evaluate(const std::string& method, const Table& imputed, const ShadowTruth& truth,
                    const Table& masked, std::span<const CellLedger> ledger, std::size_t trees) {
  if (imputed.rows() != masked.rows() || imputed.cols() != masked.cols())
    throw DataError("imputed table shape differs from the masked table");
  EvalReport report;
  report.method = method;
  for (std::size_t j = 0; j < masked.cols(); ++j) {
    const int decimals = observed_decimals(masked, j);
    AccuracyCount feature;
    for (std::size_t r = 0; r < masked.rows(); ++r) {
      if (!masked.missing(r, j)) continue;
      ++feature.cells;
      feature.correct += cells_match(imputed.cell(r, j), truth_of(truth, masked, r, j), decimals);
    }
    if (feature.cells == 0) continue;
    report.overall.cells += feature.cells;
    report.overall.correct += feature.correct;
    report.per_feature.emplace_back(masked.column(j).name, feature);
  }
  if (!ledger.empty()) {
    report.by_confidence = accuracy_by_confidence(ledger, imputed, truth, masked);
    std::size_t unimputed = 0, invalid = 0, fallback = 0;
    for (const auto& c : ledger) {
      unimputed += c.unimputed_trees.size();
      invalid += c.invalid_trees.size();
      fallback += c.fallback != Fallback::none;
    }
    const double slots = static_cast<double>(ledger.size() * std::max<std::size_t>(trees, 1));
    report.unimputed_rate = static_cast<double>(unimputed) / slots;
    report.invalid_rate = static_cast<double>(invalid) / slots;
    report.fallback_cells = fallback;
  }
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["masked_cells"] = overall.cells;
  j["correct"] = overall.correct;
  j["accuracy"] = overall.accuracy();
  nlohmann::ordered_json features = nlohmann::ordered_json::object();
  for (const auto& [name, c] : per_feature)
    features[name] = {{"cells", c.cells}, {"correct", c.correct}, {"accuracy", c.accuracy()}};
  j["per_feature"] = std::move(features);
  if (unimputed_rate) {
    nlohmann::ordered_json buckets = nlohmann::ordered_json::object();
    for (const auto& [conf, c] : by_confidence)
      buckets[std::string(to_string(conf))] = {{"cells", c.cells}, {"correct", c.correct}, {"accuracy", c.accuracy()}};
    j["accuracy_by_confidence"] = std::move(buckets);
    j["unimputed_rate"] = *unimputed_rate;
    j["invalid_rate"] = *invalid_rate;
    j["fallback_cells"] = *fallback_cells;
  }
  if (downstream)
    j["downstream"] = {{"train_accuracy", downstream->train_accuracy}, {"test_accuracy", downstream->test_accuracy}};
  return j.dump(2) + "\n";
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  char line[160];
  std::size_t width = 11;  // fits "conf:Medium"
  for (const auto& [name, c] : per_feature) width = std::max(width, name.size());
  const int w = static_cast<int>(width);
  std::snprintf(line, sizeof line, "%-*s  %8s  %8s  %8s\n", w, "feature", "cells", "correct", "accuracy");
  out << "method: " << (method.empty() ? "-" : method) << "\n" << line;
  for (const auto& [name, c] : per_feature) {
    std::snprintf(line, sizeof line, "%-*s  %8zu  %8zu  %8.4f\n", w, name.c_str(), c.cells, c.correct, c.accuracy());
    out << line;
  }
  std::snprintf(line, sizeof line, "%-*s  %8zu  %8zu  %8.4f\n", w, "overall", overall.cells, overall.correct,
                overall.accuracy());
  out << line;
  if (unimputed_rate) {
    for (const auto& [conf, c] : by_confidence) {
      std::snprintf(line, sizeof line, "%-*s  %8zu  %8zu  %8.4f\n", w,
                    ("conf:" + std::string(to_string(conf))).c_str(), c.cells, c.correct, c.accuracy());
      out << line;
    }
    std::snprintf(line, sizeof line, "unimputed rate %.4f, invalid rate %.4f, fallback cells %zu\n", *unimputed_rate,
                  *invalid_rate, *fallback_cells);
    out << line;
  }
  if (downstream) {
    std::snprintf(line, sizeof line, "downstream train %.4f, test %.4f\n", downstream->train_accuracy,
                  downstream->test_accuracy);
    out << line;
  }
  return out.str();
}

}  // namespace llmforest
