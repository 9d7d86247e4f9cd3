#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "llmforest/errors.hpp"
#include "llmforest_cli/commands.hpp"

using namespace llmforest;
using namespace llmforest::cli;

int main(int argc, char** argv) {
  CLI::App app{"Graph-guided LLM forest imputation for tabular data"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, backend, voting, sigma, run_id, output_dir;
  std::optional<std::size_t> trees, neighbors, workers;
  std::optional<int> merge_levels;
  std::optional<std::uint64_t> seed;
  bool resume = false;

  app.add_option("--config", config_path, "RunConfig JSON file")->check(CLI::ExistingFile);
  app.add_option("--backend", backend, "Completion backend")->check(CLI::IsMember({"mock", "http"}));
  app.add_option("--voting", voting, "Vote aggregation")->check(CLI::IsMember({"confidence", "majority"}));
  app.add_option("--trees", trees, "Trees in the forest (m)");
  app.add_option("--neighbors", neighbors, "Neighbors per target (q)");
  app.add_option("--merge-levels", merge_levels, "Merge hierarchy levels (L)");
  app.add_option("--sigma", sigma, "Merge threshold, jaccard:<f> or shared_count:<k>");
  app.add_option("--seed", seed, "Global seed (required here or in the config)");
  app.add_option("--workers", workers, "Worker threads; 1 runs sequentially");
  app.add_option("--run-id", run_id, "Run directory name under the output directory");
  app.add_option("--output-dir", output_dir, "Output root directory");
  app.add_flag("--resume", resume, "Continue an interrupted impute run from its checkpoint");

  auto* mask = app.add_subcommand("mask", "Inject missingness and write the masked table and shadow truth");
  auto* impute = app.add_subcommand("impute", "Impute masked cells with the LLM forest");
  auto* baseline = app.add_subcommand("baseline", "Impute with the mean, mode or KNN baseline");
  std::string method;
  std::optional<std::size_t> knn_k;
  baseline->add_option("--method", method, "Baseline method")
      ->required()
      ->check(CLI::IsMember({"mean", "mode", "knn"}));
  baseline->add_option("--k", knn_k, "KNN neighbor count");
  auto* evaluate = app.add_subcommand("evaluate", "Score an imputed table against the shadow truth");
  std::string imputed_path;
  evaluate->add_option("--imputed", imputed_path, "Imputed CSV (default: the run's imputed.csv)");
  auto* bench = app.add_subcommand("bench", "Time KNN against the graph pipeline over a size grid");

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig config;
  const int loaded = run_guarded(command, nullptr, [&] {
    if (!config_path.empty()) config = load_run_config(config_path);
    if (!backend.empty())
      config.backend.kind = backend == "http" ? BackendConfig::Kind::http : BackendConfig::Kind::mock;
    if (!voting.empty()) config.forest.voting = parse_voting_mode(voting);
    if (trees) config.forest.trees = *trees;
    if (neighbors) config.forest.neighbors = *neighbors;
    if (merge_levels) config.forest.merge_levels = *merge_levels;
    if (!sigma.empty()) config.forest.sigma = MergeThreshold::parse(sigma);
    if (seed) config.seed = *seed;
    if (workers) config.workers = *workers;
    if (!run_id.empty()) config.run_id = run_id;
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (knn_k) config.baseline.k = *knn_k;
    config.resume = resume;
    config.validate();
  });
  if (loaded != 0) return loaded;

  return run_guarded(command, &config, [&] {
    if (*mask) cmd_mask(config);
    else if (*impute) cmd_impute(config);
    else if (*baseline) cmd_baseline(config, method);
    else if (*evaluate) cmd_evaluate(config, imputed_path);
    else if (*bench) cmd_bench(config);
  });
}
