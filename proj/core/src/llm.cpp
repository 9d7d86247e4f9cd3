#include "llmforest/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include <json.hpp>

#include "llmforest/csv.hpp"
#include "llmforest/errors.hpp"

namespace llmforest {

using nlohmann::json;

std::string_view to_string(Confidence c) {
  switch (c) {
    case Confidence::high: return "High";
    case Confidence::medium: return "Medium";
    case Confidence::low: return "Low";
  }
  return "Medium";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

// Index of the brace closing the object that opens at `start`, or npos.
std::size_t matching_brace(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::string_view::npos;
}

const json* find_key(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it != obj.end()) return &*it;
  const std::string want = lower(key);
  for (auto jt = obj.begin(); jt != obj.end(); ++jt)
    if (lower(jt.key()) == want) return &*jt;
  return nullptr;
}

}  // namespace

std::optional<Confidence> parse_confidence(std::string_view text) {
  const std::string key = lower(trim(text));
  if (key == "high") return Confidence::high;
  if (key == "medium") return Confidence::medium;
  if (key == "low") return Confidence::low;
  return std::nullopt;
}

std::optional<std::string> extract_json_object(std::string_view text) {
  for (std::size_t pos = text.find('{'); pos != std::string_view::npos; pos = text.find('{', pos + 1)) {
    const std::size_t end = matching_brace(text, pos);
    if (end == std::string_view::npos) continue;
    const std::string candidate(text.substr(pos, end - pos + 1));
    const json parsed = json::parse(candidate, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) return candidate;
  }
  return std::nullopt;
}

ParseResult parse_response(std::string_view text, std::span<const std::string> target_missing,
                           std::span<const FeatureSpec> schema, std::size_t tree_id) {
  ParseResult result;
  const auto object_text = extract_json_object(text);
  if (!object_text) {
    result.parse_failure = true;
    result.unimputed.assign(target_missing.begin(), target_missing.end());
    return result;
  }
  const json obj = json::parse(*object_text);

  for (const auto& feature : target_missing) {
    auto col_it = std::find_if(schema.begin(), schema.end(),
                               [&](const FeatureSpec& s) { return s.name == feature; });
    const json* raw = find_key(obj, feature);
    if (!raw || raw->is_null()) {
      result.unimputed.push_back(feature);
      continue;
    }
    if (col_it == schema.end()) {
      result.invalid.push_back(feature);
      continue;
    }
    const FeatureSpec& spec = *col_it;

    const json* value = raw;
    const json* conf = find_key(obj, feature + "_confidence");
    if (raw->is_object()) {
      value = find_key(*raw, "value");
      if (const json* inner = find_key(*raw, "confidence")) conf = inner;
      if (!value || value->is_null()) {
        result.unimputed.push_back(feature);
        continue;
      }
    }

    std::optional<Cell> cell;
    if (spec.numeric) {
      double v = 0.0;
      bool ok = false;
      if (value->is_number()) {
        v = value->get<double>();
        ok = std::isfinite(v);
      } else if (value->is_string()) {
        ok = parse_number(value->get<std::string>(), v);
      }
      if (ok) {
        if (spec.continuous()) {
          cell = v;
        } else if (auto code = spec.code_of(Cell{v})) {
          cell = spec.distinct_values[*code];
        }
      }
    } else if (value->is_string() || value->is_number()) {
      const std::string s = value->is_string() ? trim(value->get<std::string>()) : value->dump();
      if (auto code = spec.code_of(Cell{s})) {
        cell = spec.distinct_values[*code];
      } else {
        const std::string want = lower(s);
        for (const auto& v : spec.distinct_values) {
          if (is_category(v) && lower(as_category(v)) == want) {
            cell = v;
            break;
          }
        }
      }
    }
    if (!cell) {
      result.invalid.push_back(feature);
      continue;
    }

    ImputationVote vote;
    vote.feature = feature;
    vote.column = static_cast<std::size_t>(col_it - schema.begin());
    vote.value = *cell;
    vote.tree_id = tree_id;
    if (conf && conf->is_string())
      vote.confidence = parse_confidence(conf->get<std::string>()).value_or(Confidence::medium);
    result.votes.push_back(std::move(vote));
  }
  return result;
}

void BackendConfig::validate() const {
  if (max_retries < 0) throw ConfigError("max_retries must be non-negative");
  if (kind == Kind::http) {
    if (endpoint.empty()) throw ConfigError("http backend needs an endpoint");
    if (model.empty()) throw ConfigError("http backend needs a model name");
    if (!(timeout_seconds > 0.0)) throw ConfigError("timeout must be positive");
    if (rate_limit_per_minute < 0.0) throw ConfigError("rate limit must be non-negative");
  } else if (mock_policy == MockPolicy::echo_fixture && fixture.empty()) {
    throw ConfigError("echo_fixture mock needs a fixture path");
  }
}

MockBackend::MockBackend(BackendConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.mock_policy == BackendConfig::MockPolicy::echo_fixture) fixture_text_ = read_file(config_.fixture);
}

std::string MockBackend::complete(const PromptBundle& bundle, std::size_t) {
  if (config_.mock_policy == BackendConfig::MockPolicy::echo_fixture) return fixture_text_;
  if (bundle.neighbors.empty()) throw BackendError(BackendError::Kind::mock, "prompt has no neighbor records");

  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& feature : bundle.missing_features) {
    std::vector<std::string> values;
    for (const auto& rec : bundle.neighbors)
      for (const auto& [name, v] : rec.values)
        if (name == feature) values.push_back(v);
    if (values.empty()) continue;

    const bool continuous = std::find(bundle.continuous_features.begin(), bundle.continuous_features.end(),
                                      feature) != bundle.continuous_features.end();
    std::map<Cell, std::size_t, CellLess> counts;
    double sum = 0.0;
    bool all_numbers = true;
    for (const auto& v : values) {
      double x = 0.0;
      if (parse_number(v, x)) {
        ++counts[Cell{x}];
        sum += x;
      } else {
        ++counts[Cell{v}];
        all_numbers = false;
      }
    }
    Cell best;
    std::size_t best_count = 0;
    for (const auto& [value, c] : counts) {
      if (c > best_count) {
        best = value;
        best_count = c;
      }
    }
    std::string answer = serialize_cell(best);
    if (continuous && all_numbers) answer = serialize_cell(round_significant(sum / static_cast<double>(values.size()), 6));
    out[feature] = answer;
    out[feature + "_confidence"] =
        std::string(to_string(best_count >= config_.mock_high_agreement ? Confidence::high : Confidence::medium));
  }
  return out.dump();
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  config.validate();
  if (config.kind == BackendConfig::Kind::http) return std::make_unique<HttpBackend>(config);
  return std::make_unique<MockBackend>(config);
}

}  // namespace llmforest
