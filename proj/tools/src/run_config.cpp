#include "llmforest_cli/run_config.hpp"

#include <algorithm>
#include <initializer_list>

#include <json.hpp>

#include "llmforest/csv.hpp"
#include "llmforest/errors.hpp"

namespace llmforest::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
    if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, T& into) {
  if (!obj.contains(key)) return;
  try {
    into = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_path(const json& obj, const char* key, std::filesystem::path& into, const std::filesystem::path& base) {
  std::string text;
  read(obj, key, text);
  if (text.empty()) return;
  std::filesystem::path p(text);
  into = p.is_absolute() || base.empty() ? p : base / p;
}

std::string_view mechanism_name(MissingnessSpec::Mechanism m) {
  switch (m) {
    case MissingnessSpec::Mechanism::mcar: return "mcar";
    case MissingnessSpec::Mechanism::mar: return "mar";
    case MissingnessSpec::Mechanism::mnar: return "mnar";
  }
  return "mcar";
}

}  // namespace

void RunConfig::validate() const {
  required_seed();
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (run_id.find_first_of("/\\") != std::string::npos) throw ConfigError("run_id must not contain path separators");
  if (!(missingness.rate >= 0.0 && missingness.rate < 1.0)) throw ConfigError("missingness rate must lie in [0, 1)");
  if (!(missingness.train_ratio > 0.0 && missingness.train_ratio < 1.0))
    throw ConfigError("train_ratio must lie in (0, 1)");
  forest.validate();
  if (baseline.method != "mean" && baseline.method != "mode" && baseline.method != "knn")
    throw ConfigError("baseline method must be mean, mode or knn");
}

std::uint64_t RunConfig::required_seed() const {
  if (!seed) throw ConfigError("a seed is required (config \"seed\" or --seed)");
  return *seed;
}

std::filesystem::path RunConfig::run_dir() const {
  return output_dir / (run_id.empty() ? "run-" + std::to_string(required_seed()) : run_id);
}

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  const json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded()) throw ConfigError("config is not valid JSON");
  check_keys(root, "config",
             {"run_id", "seed", "workers", "paths", "missingness", "forest", "backend", "baseline", "eval", "bench"});

  RunConfig c;
  read(root, "run_id", c.run_id);
  if (root.contains("seed")) {
    std::uint64_t s = 0;
    read(root, "seed", s);
    c.seed = s;
  }
  read(root, "workers", c.workers);

  if (root.contains("paths")) {
    const json& p = root["paths"];
    check_keys(p, "paths", {"input", "schema", "output_dir", "templates"});
    read_path(p, "input", c.input, base_dir);
    read_path(p, "schema", c.schema, base_dir);
    read_path(p, "output_dir", c.output_dir, base_dir);
    read_path(p, "templates", c.templates, base_dir);
  }

  if (root.contains("missingness")) {
    const json& m = root["missingness"];
    check_keys(m, "missingness", {"mechanism", "rate", "percentile", "order", "train_ratio", "mnar"});
    std::string mech = "mcar", order = "mask_then_split";
    read(m, "mechanism", mech);
    if (mech == "mcar") c.missingness.mechanism = MissingnessSpec::Mechanism::mcar;
    else if (mech == "mar") c.missingness.mechanism = MissingnessSpec::Mechanism::mar;
    else if (mech == "mnar") c.missingness.mechanism = MissingnessSpec::Mechanism::mnar;
    else throw ConfigError("unknown missingness mechanism: " + mech);
    read(m, "order", order);
    if (order == "mask_then_split") c.missingness.order = MissingnessSpec::Order::mask_then_split;
    else if (order == "split_then_mask") c.missingness.order = MissingnessSpec::Order::split_then_mask;
    else throw ConfigError("unknown missingness order: " + order);
    read(m, "rate", c.missingness.rate);
    read(m, "percentile", c.missingness.percentile);
    read(m, "train_ratio", c.missingness.train_ratio);
    if (m.contains("mnar")) {
      const json& mn = m["mnar"];
      check_keys(mn, "missingness.mnar", {"self_probability", "cross_probability", "percentile"});
      read(mn, "self_probability", c.missingness.mnar.self_probability);
      read(mn, "cross_probability", c.missingness.mnar.cross_probability);
      read(mn, "percentile", c.missingness.mnar.percentile);
    }
  }

  if (root.contains("forest")) {
    const json& f = root["forest"];
    check_keys(f, "forest",
               {"trees", "neighbors", "merge_levels", "sigma", "voting", "weights", "walk", "graph", "prompt"});
    auto& fc = c.forest;
    read(f, "trees", fc.trees);
    read(f, "neighbors", fc.neighbors);
    read(f, "merge_levels", fc.merge_levels);
    if (f.contains("sigma")) fc.sigma = MergeThreshold::parse(f["sigma"].get<std::string>());
    if (f.contains("voting")) fc.voting = parse_voting_mode(f["voting"].get<std::string>());
    if (f.contains("weights")) {
      const json& w = f["weights"];
      check_keys(w, "forest.weights", {"High", "Medium", "Low"});
      read(w, "High", fc.weights.high);
      read(w, "Medium", fc.weights.medium);
      read(w, "Low", fc.weights.low);
    }
    if (f.contains("walk")) {
      const json& w = f["walk"];
      check_keys(w, "forest.walk", {"steps", "temperature", "retry_factor"});
      read(w, "steps", fc.walk.steps);
      read(w, "temperature", fc.walk.temperature);
      read(w, "retry_factor", fc.walk.retry_factor);
    }
    if (f.contains("graph")) {
      const json& g = f["graph"];
      check_keys(g, "forest.graph", {"bins", "max_unbinned_distinct"});
      read(g, "bins", fc.graph.bin_count);
      read(g, "max_unbinned_distinct", fc.graph.max_unbinned_distinct);
    }
    if (f.contains("prompt")) {
      const json& p = f["prompt"];
      check_keys(p, "forest.prompt", {"subject", "correlation_threshold", "max_correlation_pairs", "char_budget"});
      read(p, "subject", fc.prompt.subject);
      read(p, "correlation_threshold", fc.prompt.correlation_threshold);
      read(p, "max_correlation_pairs", fc.prompt.max_correlation_pairs);
      read(p, "char_budget", fc.prompt.char_budget);
    }
  }

  if (root.contains("backend")) {
    const json& b = root["backend"];
    check_keys(b, "backend",
               {"kind", "endpoint", "model", "api_key_env", "timeout_seconds", "max_retries", "rate_limit_per_minute",
                "temperature", "backoff_seconds", "audit_log", "mock_policy", "mock_high_agreement", "fixture"});
    auto& bc = c.backend;
    std::string kind = "mock", policy = "neighbor_mode";
    read(b, "kind", kind);
    if (kind == "mock") bc.kind = BackendConfig::Kind::mock;
    else if (kind == "http") bc.kind = BackendConfig::Kind::http;
    else throw ConfigError("backend kind must be mock or http");
    read(b, "mock_policy", policy);
    if (policy == "neighbor_mode") bc.mock_policy = BackendConfig::MockPolicy::neighbor_mode;
    else if (policy == "echo_fixture") bc.mock_policy = BackendConfig::MockPolicy::echo_fixture;
    else throw ConfigError("mock_policy must be neighbor_mode or echo_fixture");
    read(b, "endpoint", bc.endpoint);
    read(b, "model", bc.model);
    read(b, "api_key_env", bc.api_key_env);
    read(b, "timeout_seconds", bc.timeout_seconds);
    read(b, "max_retries", bc.max_retries);
    read(b, "rate_limit_per_minute", bc.rate_limit_per_minute);
    read(b, "temperature", bc.temperature);
    read(b, "backoff_seconds", bc.backoff_seconds);
    read(b, "mock_high_agreement", bc.mock_high_agreement);
    read_path(b, "audit_log", bc.audit_log, base_dir);
    read_path(b, "fixture", bc.fixture, base_dir);
  }

  if (root.contains("baseline")) {
    const json& b = root["baseline"];
    check_keys(b, "baseline", {"method", "k"});
    read(b, "method", c.baseline.method);
    read(b, "k", c.baseline.k);
  }

  if (root.contains("eval")) {
    const json& e = root["eval"];
    check_keys(e, "eval", {"downstream", "epochs", "learning_rate", "l2"});
    read(e, "downstream", c.eval.downstream);
    read(e, "epochs", c.eval.logreg.epochs);
    read(e, "learning_rate", c.eval.logreg.learning_rate);
    read(e, "l2", c.eval.logreg.l2);
  }

  if (root.contains("bench")) {
    const json& b = root["bench"];
    check_keys(b, "bench", {"sizes", "features", "neighbors", "repetitions", "merge_levels", "sigma", "walk_steps"});
    read(b, "sizes", c.bench.sizes);
    read(b, "features", c.bench.features);
    read(b, "neighbors", c.bench.neighbors);
    read(b, "repetitions", c.bench.repetitions);
    read(b, "merge_levels", c.bench.merge_levels);
    read(b, "walk_steps", c.bench.walk_steps);
    if (b.contains("sigma")) c.bench.sigma = MergeThreshold::parse(b["sigma"].get<std::string>());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse_run_config(read_file(path), path.parent_path());
}

std::string RunConfig::to_json() const {
  ordered_json j;
  j["run_id"] = run_id;
  j["seed"] = required_seed();
  j["workers"] = workers;
  j["paths"] = {{"input", input.string()},
                {"schema", schema.string()},
                {"output_dir", output_dir.string()},
                {"templates", templates.string()}};
  j["missingness"] = {
      {"mechanism", std::string(mechanism_name(missingness.mechanism))},
      {"rate", missingness.rate},
      {"percentile", missingness.percentile},
      {"order", missingness.order == MissingnessSpec::Order::mask_then_split ? "mask_then_split" : "split_then_mask"},
      {"train_ratio", missingness.train_ratio},
      {"mnar",
       {{"self_probability", missingness.mnar.self_probability},
        {"cross_probability", missingness.mnar.cross_probability},
        {"percentile", missingness.mnar.percentile}}}};
  const auto& f = forest;
  j["forest"] = {
      {"trees", f.trees},
      {"neighbors", f.neighbors},
      {"merge_levels", f.merge_levels},
      {"sigma", f.sigma.to_string()},
      {"voting", std::string(llmforest::to_string(f.voting))},
      {"weights", {{"High", f.weights.high}, {"Medium", f.weights.medium}, {"Low", f.weights.low}}},
      {"walk", {{"steps", f.walk.steps}, {"temperature", f.walk.temperature}, {"retry_factor", f.walk.retry_factor}}},
      {"graph", {{"bins", f.graph.bin_count}, {"max_unbinned_distinct", f.graph.max_unbinned_distinct}}},
      {"prompt",
       {{"subject", f.prompt.subject},
        {"correlation_threshold", f.prompt.correlation_threshold},
        {"max_correlation_pairs", f.prompt.max_correlation_pairs},
        {"char_budget", f.prompt.char_budget}}}};
  const auto& b = backend;
  j["backend"] = {
      {"kind", b.kind == BackendConfig::Kind::http ? "http" : "mock"},
      {"endpoint", b.endpoint},
      {"model", b.model},
      {"api_key_env", b.api_key_env},
      {"timeout_seconds", b.timeout_seconds},
      {"max_retries", b.max_retries},
      {"rate_limit_per_minute", b.rate_limit_per_minute},
      {"temperature", b.temperature},
      {"backoff_seconds", b.backoff_seconds},
      {"audit_log", b.audit_log.string()},
      {"mock_policy", b.mock_policy == BackendConfig::MockPolicy::neighbor_mode ? "neighbor_mode" : "echo_fixture"},
      {"mock_high_agreement", b.mock_high_agreement},
      {"fixture", b.fixture.string()}};
  j["baseline"] = {{"method", baseline.method}, {"k", baseline.k}};
  j["eval"] = {{"downstream", eval.downstream},
               {"epochs", eval.logreg.epochs},
               {"learning_rate", eval.logreg.learning_rate},
               {"l2", eval.logreg.l2}};
  j["bench"] = {{"sizes", bench.sizes},
                {"features", bench.features},
                {"neighbors", bench.neighbors},
                {"repetitions", bench.repetitions},
                {"merge_levels", bench.merge_levels},
                {"sigma", bench.sigma.to_string()},
                {"walk_steps", bench.walk_steps}};
  return j.dump(2) + "\n";
}

}  // namespace llmforest::cli
