#include "llmforest_cli/commands.hpp"

#include <cstdio>
#include <iostream>

#include <json.hpp>

#include "llmforest/csv.hpp"
#include "llmforest/errors.hpp"
#include "llmforest/eval.hpp"
#include "llmforest/rng.hpp"

namespace llmforest::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void require_file(const fs::path& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path is not set");
  if (!fs::exists(path)) throw ConfigError(what + " not found: " + path.string());
}

MaskedTable apply_mechanism(const Table& table, const MissingnessSpec& spec, std::uint64_t seed) {
  switch (spec.mechanism) {
    case MissingnessSpec::Mechanism::mcar: return apply_mcar(table, spec.rate, seed);
    case MissingnessSpec::Mechanism::mar: return apply_mar(table, spec.percentile, spec.rate, seed);
    case MissingnessSpec::Mechanism::mnar: return apply_mnar(table, seed, spec.mnar);
  }
  throw ConfigError("unknown missingness mechanism");
}

struct RunInputs {
  Schema schema;
  Table masked;
  ShadowTruth truth;
};

RunInputs load_run_inputs(const fs::path& dir) {
  require_file(dir / "schema.json", "schema.json (run the mask command first)");
  require_file(dir / "masked.csv", "masked.csv (run the mask command first)");
  require_file(dir / "truth.csv", "truth.csv (run the mask command first)");
  RunInputs in;
  in.schema = load_schema(dir / "schema.json");
  in.masked = load_csv(dir / "masked.csv", in.schema);
  in.truth = load_truth_csv(dir / "truth.csv", in.masked);
  return in;
}

DownstreamResult downstream(const RunConfig& config, const fs::path& dir, const Table& imputed,
                            const RunInputs& in) {
  const auto label = in.masked.label_column();
  if (!label) throw ConfigError("downstream evaluation needs a label column in the schema");
  require_file(dir / "split.json", "split.json");
  const json split = json::parse(read_file(dir / "split.json"));
  const auto train_rows = split.at("train_rows").get<std::vector<std::size_t>>();
  const auto test_rows = split.at("test_rows").get<std::vector<std::size_t>>();
  const Table train = imputed.select_rows(train_rows);
  const Table test = restore_truth(in.masked, in.truth).select_rows(test_rows);
  const auto model = train_logreg(train, *label, config.eval.logreg);
  return {model.accuracy(train), model.accuracy(test)};
}

void write_report(const fs::path& dir, const std::string& stem, const EvalReport& report) {
  write_file(dir / (stem + ".json"), report.to_json());
  write_file(dir / (stem + ".txt"), report.to_text());
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void cmd_mask(const RunConfig& config) {
  config.validate();
  const std::uint64_t seed = config.required_seed();
  require_file(config.input, "input CSV");
  require_file(config.schema, "schema");
  Schema schema = load_schema(config.schema);
  const Table table = load_csv(config.input, schema);
  const auto& spec = config.missingness;

  MaskedTable masked;
  SplitResult parts;
  if (spec.order == MissingnessSpec::Order::mask_then_split) {
    masked = apply_mechanism(table, spec, mix_seed(seed, 1));
    parts = split(table, spec.train_ratio, mix_seed(seed, 2));
  } else {
    parts = split(table, spec.train_ratio, mix_seed(seed, 2));
    const auto first = apply_mechanism(parts.first, spec, mix_seed(seed, 1));
    const auto second = apply_mechanism(parts.second, spec, mix_seed(seed, 3));
    std::vector<Cell> cells(table.cells().size());
    const std::size_t d = table.cols();
    auto place = [&](const MaskedTable& part, const std::vector<std::size_t>& rows) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto row = part.table.row(i);
        std::copy(row.begin(), row.end(), cells.begin() + static_cast<std::ptrdiff_t>(rows[i] * d));
      }
      for (const auto& [key, value] : part.truth.entries()) masked.truth.set(rows[key.first], key.second, value);
    };
    place(first, parts.first_rows);
    place(second, parts.second_rows);
    masked.table = table.with_cells(std::move(cells));
  }

  const fs::path dir = config.run_dir();
  fs::create_directories(dir);
  if (std::find(schema.missing_tokens.begin(), schema.missing_tokens.end(), "") == schema.missing_tokens.end())
    schema.missing_tokens.push_back("");
  write_file(dir / "schema.json", schema_to_json(schema));
  write_csv(dir / "masked.csv", masked.table);
  write_truth_csv(dir / "truth.csv", masked.truth, masked.table);
  ordered_json split_json;
  split_json["order"] = spec.order == MissingnessSpec::Order::mask_then_split ? "mask_then_split" : "split_then_mask";
  split_json["train_ratio"] = spec.train_ratio;
  split_json["train_rows"] = parts.first_rows;
  split_json["test_rows"] = parts.second_rows;
  write_file(dir / "split.json", split_json.dump(2) + "\n");
  write_file(dir / "config.mask.json", config.to_json());
}

void cmd_impute(const RunConfig& config) {
  config.validate();
  const fs::path dir = config.run_dir();
  const RunInputs in = load_run_inputs(dir);

  ForestConfig forest = config.forest;
  forest.seed = config.required_seed();
  forest.workers = config.workers;
  if (!config.templates.empty()) forest.prompt_template = PromptTemplate::load(config.templates);

  BackendConfig backend_config = config.backend;
  if (backend_config.kind == BackendConfig::Kind::http && backend_config.audit_log.empty())
    backend_config.audit_log = dir / "audit.jsonl";
  const auto backend = make_backend(backend_config);

  // Worker count, the resume flag and run naming do not change results, so
  // they stay out of the checkpoint fingerprint.
  RunConfig identity = config;
  identity.workers = 1;
  identity.resume = false;
  identity.run_id.clear();
  identity.output_dir.clear();
  ImputeOptions options;
  options.checkpoint = dir / "checkpoint.jsonl";
  options.resume = config.resume;
  options.fingerprint = hex64(fnv1a64(identity.to_json()));

  const auto result = impute_all(in.masked, forest, *backend, options);
  write_csv(dir / "imputed.csv", result.imputed);
  write_ledger(dir / "ledger.jsonl", result.ledger);
  auto report = evaluate("llm_forest", result.imputed, in.truth, in.masked, result.ledger, forest.trees);
  if (config.eval.downstream) report.downstream = downstream(config, dir, result.imputed, in);
  write_report(dir, "report", report);
  write_file(dir / "config.impute.json", config.to_json());
}

void cmd_baseline(const RunConfig& config, const std::string& method) {
  config.validate();
  const fs::path dir = config.run_dir();
  const RunInputs in = load_run_inputs(dir);
  Table imputed;
  if (method == "mode") {
    imputed = impute_mode(in.masked);
  } else if (method == "mean") {
    imputed = impute_mean(in.masked);
  } else if (method == "knn") {
    KnnConfig knn;
    knn.k = config.baseline.k;
    imputed = impute_knn(in.masked, knn, config.workers);
  } else {
    throw ConfigError("baseline method must be mean, mode or knn, got " + method);
  }
  write_csv(dir / ("imputed_" + method + ".csv"), imputed);
  auto report = evaluate(method, imputed, in.truth, in.masked);
  if (config.eval.downstream) report.downstream = downstream(config, dir, imputed, in);
  write_report(dir, "report_" + method, report);
  RunConfig snapshot = config;
  snapshot.baseline.method = method;
  write_file(dir / "config.baseline.json", snapshot.to_json());
}

void cmd_evaluate(const RunConfig& config, const fs::path& imputed_path) {
  config.validate();
  const fs::path dir = config.run_dir();
  const RunInputs in = load_run_inputs(dir);
  const fs::path path = imputed_path.empty() ? dir / "imputed.csv" : imputed_path;
  require_file(path, "imputed CSV");
  const Table imputed = load_csv(path, in.schema);

  std::vector<CellLedger> ledger;
  if (imputed_path.empty() && fs::exists(dir / "ledger.jsonl")) ledger = read_ledger(dir / "ledger.jsonl", in.masked);
  auto report = evaluate(path.stem().string(), imputed, in.truth, in.masked, ledger, config.forest.trees);
  if (config.eval.downstream) report.downstream = downstream(config, dir, imputed, in);
  write_report(dir, "evaluation", report);
  write_file(dir / "config.evaluate.json", config.to_json());
}

void cmd_bench(const RunConfig& config) {
  config.validate();
  BenchConfig bench = config.bench;
  bench.seed = config.required_seed();
  bench.workers = config.workers;
  const auto report = bench_neighbor_search(bench);
  const fs::path dir = config.run_dir();
  write_file(dir / "bench.json", report.to_json());
  write_file(dir / "bench.csv", report.to_csv());
  write_file(dir / "bench.txt", report.to_text());
  write_file(dir / "config.bench.json", config.to_json());
}

int run_guarded(const std::string& command, const RunConfig* config, const std::function<void()>& body) {
  ordered_json error;
  int code = 0;
  try {
    body();
    if (config) fs::remove(config->run_dir() / "error.json");
    return 0;
  } catch (const ImputationAborted& e) {
    code = 4;
    error = {{"kind", "backend_aborted"},
             {"message", e.what()},
             {"completed_targets", e.completed()},
             {"total_targets", e.total()},
             {"hint", "rerun with --resume to continue from checkpoint.jsonl"}};
  } catch (const BackendError& e) {
    code = 4;
    error = {{"kind", "backend"}, {"message", e.what()}};
  } catch (const ConfigError& e) {
    code = 2;
    error = {{"kind", "config"}, {"message", e.what()}};
  } catch (const DataError& e) {
    code = 3;
    error = {{"kind", "data"}, {"message", e.what()}};
  } catch (const GraphError& e) {
    code = 3;
    error = {{"kind", "graph"}, {"message", e.what()}};
  } catch (const std::exception& e) {
    code = 1;
    error = {{"kind", "internal"}, {"message", e.what()}};
  }
  error["command"] = command;
  std::cerr << "llmforest " << command << ": " << error["message"].get<std::string>() << "\n";
  if (config) {
    try {
      write_file(config->run_dir() / "error.json", error.dump(2) + "\n");
    } catch (const std::exception&) {
      std::cerr << error.dump() << "\n";
    }
  } else {
    std::cerr << error.dump() << "\n";
  }
  return code;
}

}  // namespace llmforest::cli
