#include "llmforest/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "llmforest/csv.hpp"

namespace llmforest {

PromptTemplate PromptTemplate::load(const std::filesystem::path& dir) {
  PromptTemplate t;
  auto read_if = [&](const char* name, std::string& into) {
    const auto p = dir / name;
    if (!std::filesystem::exists(p)) return;
    into = read_file(p);
    while (!into.empty() && (into.back() == '\n' || into.back() == '\r')) into.pop_back();
  };
  read_if("system.txt", t.system);
  read_if("user.txt", t.user);
  read_if("setup.txt", t.setup);
  std::string strategies;
  read_if("strategies.txt", strategies);
  if (!strategies.empty()) {
    std::istringstream in(strategies);
    std::string line;
    t.strategies.clear();
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      // A line ending with ':' before any strategy replaces the intro sentence.
      if (first && line.back() == ':') {
        t.strategies_intro = line;
      } else {
        t.strategies.push_back(line);
      }
      first = false;
    }
  }
  return t;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string PromptBundle::hash() const {
  std::uint64_t h = fnv1a64(system_text);
  h = fnv1a64("\x1f", h);
  h = fnv1a64(user_text, h);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fill_placeholders(const std::string& text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      const auto close = text.find('}', i + 1);
      if (close != std::string::npos) {
        auto it = values.find(text.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string row_to_text(std::span<const Cell> row, std::span<const FeatureSpec> schema,
                        const std::string& subject) {
  std::string out;
  std::vector<std::string> missing;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (is_missing(row[j])) {
      missing.push_back(schema[j].name);
      continue;
    }
    if (!out.empty()) out.push_back(' ');
    out += schema[j].name + ": " + serialize_cell(row[j]) + ";";
  }
  if (!missing.empty()) {
    if (!out.empty()) out.push_back(' ');
    out += "the " + subject + " has missing features: {";
    for (std::size_t k = 0; k < missing.size(); ++k) out += (k ? ", " : "") + missing[k];
    out += "}.";
  }
  return out;
}

std::string correlation_summary(const FeatureStats& stats, std::span<const FeatureSpec> schema,
                                const PromptOptions& options) {
  struct Pair {
    std::size_t a, b;
    double r;
  };
  std::vector<Pair> pairs;
  const std::size_t d = schema.size();
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b)
      if (std::abs(stats.corr(a, b)) >= options.correlation_threshold) pairs.push_back({a, b, stats.corr(a, b)});
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& x, const Pair& y) { return std::abs(x.r) > std::abs(y.r); });
  if (pairs.size() > options.max_correlation_pairs) pairs.resize(options.max_correlation_pairs);

  std::string out;
  char buf[32];
  if (pairs.empty()) {
    out = "No feature pair passes the correlation threshold.";
  } else {
    out = "Notable feature correlations: ";
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.2f", pairs[k].r);
      out += (k ? "; " : "") + schema[pairs[k].a].name + " is correlated with " + schema[pairs[k].b].name +
             " (" + buf + ")";
    }
    out += ".";
  }
  out += "\nFeature summaries: ";
  for (std::size_t j = 0; j < d; ++j) {
    const auto& cs = stats.columns[j];
    out += (j ? "; " : "") + schema[j].name;
    if (cs.mean) {
      out += " (mean = " + display_cell(*cs.mean) + ")";
    } else {
      const double share = cs.observed ? 100.0 * static_cast<double>(cs.mode_count) / static_cast<double>(cs.observed) : 0.0;
      std::snprintf(buf, sizeof(buf), "%.0f", share);
      out += " (mode = " + display_cell(cs.mode) + ", " + buf + "% of records)";
    }
  }
  out += ".";
  return out;
}

namespace {

std::string descriptions_text(const Table& table) {
  std::string out = table.description().empty() ? "Tabular health records."
                                                 : table.description();
  std::string features;
  for (const auto& spec : table.columns()) {
    if (spec.description.empty()) continue;
    features += "\n" + spec.name + ": " + spec.description;
  }
  if (!features.empty())
    out += "\nFeature descriptions (<name>: <description>):" + features;
  return out;
}

}  // namespace

std::optional<PromptBundle> build_prompt(std::size_t target, const NeighborSet& neighbors,
                                         const FeatureStats& stats, const Table& table,
                                         const PromptTemplate& tmpl, const PromptOptions& options) {
  const auto& schema = table.columns();
  PromptBundle bundle;
  bundle.target = target;
  std::vector<std::size_t> missing_cols;
  for (std::size_t j = 0; j < table.cols(); ++j) {
    if (!table.missing(target, j)) continue;
    missing_cols.push_back(j);
    bundle.missing_features.push_back(schema[j].name);
    if (schema[j].continuous()) bundle.continuous_features.push_back(schema[j].name);
  }
  if (missing_cols.empty()) return std::nullopt;

  std::vector<NeighborRecord> usable;
  for (const auto& n : neighbors.ranked) {
    if (n.entry == target) continue;
    const bool helps = std::any_of(missing_cols.begin(), missing_cols.end(),
                                   [&](std::size_t j) { return !table.missing(n.entry, j); });
    if (!helps) continue;
    NeighborRecord rec;
    rec.entry = n.entry;
    rec.score = n.score;
    for (std::size_t j = 0; j < table.cols(); ++j)
      if (!table.missing(n.entry, j)) rec.values.emplace_back(schema[j].name, serialize_cell(table.cell(n.entry, j)));
    usable.push_back(std::move(rec));
  }
  if (usable.empty()) return std::nullopt;

  const std::string id = std::to_string(target);
  std::string strategies = tmpl.strategies_intro;
  for (std::size_t k = 0; k < tmpl.strategies.size(); ++k)
    strategies += " (" + std::to_string(k + 1) + ") " + tmpl.strategies[k];
  const std::string setup = fill_placeholders(tmpl.setup, {{"subject", options.subject}, {"target_id", id}});
  bundle.system_text = fill_placeholders(tmpl.system, {{"setup", setup}, {"strategies", strategies}});

  std::string instruction =
      "Reply with a single JSON object and nothing else, shaped like "
      "{\"<feature>\": \"<value>\", \"<feature>_confidence\": \"High|Medium|Low\"}. "
      "Include a value and a confidence level for each of these features: ";
  for (std::size_t k = 0; k < bundle.missing_features.size(); ++k)
    instruction += (k ? ", " : "") + bundle.missing_features[k];
  instruction += ".";

  const std::map<std::string, std::string> fixed = {
      {"correlations", correlation_summary(stats, schema, options)},
      {"descriptions", descriptions_text(table)},
      {"target", "Record of " + options.subject + " " + id + " to complete: " +
                     row_to_text(table.row(target), schema, options.subject)},
      {"instruction", instruction},
  };

  for (std::size_t keep = usable.size(); keep > 0; --keep) {
    std::string block = "Records of " + options.subject + "s resembling " + options.subject + " " + id + ":";
    for (std::size_t k = 0; k < keep; ++k)
      block += "\nSimilar " + options.subject + " records " + std::to_string(k + 1) + " are " +
               row_to_text(table.row(usable[k].entry), schema, options.subject);
    auto values = fixed;
    values["neighbors"] = block;
    std::string user = fill_placeholders(tmpl.user, values);
    if (bundle.system_text.size() + user.size() <= options.char_budget || options.char_budget == 0) {
      bundle.user_text = std::move(user);
      usable.resize(keep);
      bundle.neighbors = std::move(usable);
      return bundle;
    }
  }
  return std::nullopt;
}

}  // namespace llmforest
