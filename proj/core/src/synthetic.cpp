#include "llmforest/synthetic.hpp"

#include <string>

#include "llmforest/errors.hpp"
#include "llmforest/rng.hpp"

namespace llmforest {

namespace {

std::vector<FeatureSpec> categorical_columns(std::size_t d) {
  std::vector<FeatureSpec> cols(d);
  for (std::size_t j = 0; j < d; ++j) {
    cols[j].name = "f" + std::to_string(j);
    cols[j].kind = FeatureKind::categorical;
  }
  return cols;
}

}  // namespace

Table make_cluster_table(const ClusterTableSpec& spec, std::vector<std::size_t>* cluster_of) {
  if (spec.clusters == 0 || spec.rows < spec.clusters || spec.signature_features > spec.features ||
      spec.noise_values == 0)
    throw ConfigError("invalid cluster table spec");
  Rng rng(spec.seed);
  std::vector<Cell> cells;
  cells.reserve(spec.rows * spec.features);
  if (cluster_of) cluster_of->assign(spec.rows, 0);
  for (std::size_t r = 0; r < spec.rows; ++r) {
    const std::size_t c = r * spec.clusters / spec.rows;
    if (cluster_of) (*cluster_of)[r] = c;
    for (std::size_t j = 0; j < spec.features; ++j) {
      if (j < spec.signature_features)
        cells.emplace_back("c" + std::to_string(c));
      else
        cells.emplace_back("n" + std::to_string(rng.index(spec.noise_values)));
    }
  }
  return Table(categorical_columns(spec.features), std::move(cells));
}

Table make_bench_table(std::size_t rows, std::size_t features, std::uint64_t seed, std::size_t clusters,
                       std::size_t values) {
  if (clusters == 0 || values == 0) throw ConfigError("invalid bench table spec");
  Rng rng(seed);
  std::vector<std::size_t> signature(clusters * features);
  for (auto& v : signature) v = rng.index(values);
  std::vector<Cell> cells;
  cells.reserve(rows * features);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t c = rng.index(clusters);
    for (std::size_t j = 0; j < features; ++j) {
      const std::size_t v = rng.bernoulli(0.7) ? signature[c * features + j] : rng.index(values);
      cells.emplace_back("v" + std::to_string(v));
    }
  }
  return Table(categorical_columns(features), std::move(cells));
}

}  // namespace llmforest
