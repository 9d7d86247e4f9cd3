#include "llmforest/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>

#include <json.hpp>

#include "llmforest/csv.hpp"
#include "llmforest/errors.hpp"
#include "llmforest/parallel.hpp"
#include "llmforest/rng.hpp"
#include "llmforest/stats.hpp"

namespace llmforest {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(VotingMode mode) {
  return mode == VotingMode::majority ? "majority" : "confidence";
}

VotingMode parse_voting_mode(std::string_view text) {
  if (text == "confidence" || text == "confidence_weighted") return VotingMode::confidence_weighted;
  if (text == "majority") return VotingMode::majority;
  throw ConfigError("unknown voting mode: " + std::string(text));
}

double ConfidenceWeights::of(Confidence c) const {
  switch (c) {
    case Confidence::high: return high;
    case Confidence::medium: return medium;
    case Confidence::low: return low;
  }
  return medium;
}

void ConfidenceWeights::validate() const {
  if (!(low > 0.0) || !std::isfinite(high)) throw ConfigError("confidence weights must be positive and finite");
  if (high < medium || medium < low) throw ConfigError("confidence weights must satisfy High >= Medium >= Low");
}

void ForestConfig::validate() const {
  if (trees < 1) throw ConfigError("forest needs at least one tree");
  if (neighbors < 1) throw ConfigError("neighbors per target must be at least 1");
  if (merge_levels < 0) throw ConfigError("merge levels must be non-negative");
  weights.validate();
  WalkConfig w = walk;
  w.rounds = neighbors;
  w.validate();
}

TreeNeighbors grow_tree(std::span<const BipartiteGraph> graphs, std::span<const std::size_t> targets,
                        std::size_t tree_id, const ForestConfig& config) {
  const std::uint64_t tree_seed = mix_seed(config.seed, tree_id);
  const int levels = std::min(config.merge_levels, max_merge_levels(graphs.size()));

  TreeNeighbors tree;
  tree.tree_id = tree_id;
  tree.plan = plan_hierarchy(graphs, levels, config.sigma, mix_seed(tree_seed, 1));
  const auto merged =
      run_merge(std::vector<BipartiteGraph>(graphs.begin(), graphs.end()), tree.plan, config.workers);
  tree.graph_count = merged.size();

  WalkConfig walk = config.walk;
  walk.rounds = config.neighbors;
  walk.seed = mix_seed(tree_seed, 2);
  const auto indices = index_graphs(merged, walk.temperature);
  tree.neighbors.resize(targets.size());
  parallel_for(targets.size(), config.workers, [&](std::size_t i) {
    tree.neighbors[i] = select_neighbors(indices, targets[i], walk);
  });
  return tree;
}

namespace {

int strength(Confidence c) {
  switch (c) {
    case Confidence::high: return 3;
    case Confidence::medium: return 2;
    case Confidence::low: return 1;
  }
  return 0;
}

bool nearly_equal(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace

VoteOutcome weighted_vote(std::span<const ImputationVote> votes, VotingMode mode,
                          const ConfidenceWeights& weights) {
  if (votes.empty()) throw std::invalid_argument("weighted_vote needs at least one vote");
  struct Tally {
    double score = 0.0;
    Confidence best = Confidence::low;
  };
  std::map<Cell, Tally, CellLess> tally;
  for (const auto& v : votes) {
    auto [it, fresh] = tally.try_emplace(v.value);
    it->second.score += mode == VotingMode::majority ? 1.0 : weights.of(v.confidence);
    if (fresh || strength(v.confidence) > strength(it->second.best)) it->second.best = v.confidence;
  }
  auto winner = tally.begin();
  for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
    const double a = it->second.score;
    const double b = winner->second.score;
    if (nearly_equal(a, b)) {
      if (strength(it->second.best) > strength(winner->second.best)) winner = it;
    } else if (a > b) {
      winner = it;
    }
  }
  return {winner->first, winner->second.best, winner->second.score};
}

std::string_view to_string(Fallback f) {
  switch (f) {
    case Fallback::none: return "none";
    case Fallback::neighbor_mode: return "neighbor_mode";
    case Fallback::global_mode: return "global_mode";
  }
  return "none";
}

void write_ledger(std::ostream& out, std::span<const CellLedger> ledger) {
  for (const auto& c : ledger) {
    ordered_json rec;
    rec["row"] = c.row;
    rec["feature"] = c.feature;
    ordered_json votes = ordered_json::array();
    for (const auto& v : c.votes)
      votes.push_back({{"tree", v.tree_id},
                       {"value", serialize_cell(v.value)},
                       {"confidence", std::string(to_string(v.confidence))}});
    rec["votes"] = std::move(votes);
    rec["unimputed"] = c.unimputed_trees;
    rec["invalid"] = c.invalid_trees;
    rec["winner"] = serialize_cell(c.winner);
    rec["confidence"] = c.confidence ? ordered_json(std::string(to_string(*c.confidence))) : ordered_json();
    rec["fallback"] = c.fallback == Fallback::none ? ordered_json() : ordered_json(std::string(to_string(c.fallback)));
    out << rec.dump() << '\n';
  }
}

void write_ledger(const std::filesystem::path& path, std::span<const CellLedger> ledger) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_ledger(out, ledger);
}

namespace {

Cell cell_from_text(const FeatureSpec& spec, const std::string& text) {
  double v = 0.0;
  if (spec.numeric && parse_number(text, v)) return v;
  return text;
}

}  // namespace

std::vector<CellLedger> read_ledger(const std::filesystem::path& path, const Table& table) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<CellLedger> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) throw DataError("malformed ledger line in " + path.string());
    CellLedger c;
    c.row = rec.at("row").get<std::size_t>();
    c.feature = rec.at("feature").get<std::string>();
    const auto col = table.column_index(c.feature);
    if (!col) throw DataError("ledger names unknown feature " + c.feature);
    c.column = *col;
    const auto& spec = table.column(*col);
    for (const auto& v : rec.at("votes")) {
      ImputationVote vote;
      vote.feature = c.feature;
      vote.column = c.column;
      vote.tree_id = v.at("tree").get<std::size_t>();
      vote.value = cell_from_text(spec, v.at("value").get<std::string>());
      vote.confidence = parse_confidence(v.at("confidence").get<std::string>()).value_or(Confidence::medium);
      c.votes.push_back(std::move(vote));
    }
    c.unimputed_trees = rec.at("unimputed").get<std::vector<std::size_t>>();
    c.invalid_trees = rec.at("invalid").get<std::vector<std::size_t>>();
    c.winner = cell_from_text(spec, rec.at("winner").get<std::string>());
    if (rec.at("confidence").is_string()) c.confidence = parse_confidence(rec["confidence"].get<std::string>());
    if (rec.at("fallback").is_string()) {
      const auto f = rec["fallback"].get<std::string>();
      c.fallback = f == "neighbor_mode" ? Fallback::neighbor_mode : Fallback::global_mode;
    }
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

// Raw responses of one target, one slot per tree; nullopt when no prompt
// could be built for that tree.
using TargetResponses = std::vector<std::optional<std::string>>;

class Checkpoint {
 public:
  Checkpoint(const ImputeOptions& options, std::size_t trees) : path_(options.checkpoint) {
    if (path_.empty()) return;
    if (options.resume && std::filesystem::exists(path_)) {
      load(options.fingerprint, trees);
      out_.open(path_, std::ios::app | std::ios::binary);
    } else {
      if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
      out_.open(path_, std::ios::trunc | std::ios::binary);
      out_ << ordered_json{{"fingerprint", options.fingerprint}, {"trees", trees}}.dump() << '\n';
      out_.flush();
    }
    if (!out_) throw DataError("cannot write checkpoint " + path_.string());
  }

  const TargetResponses* find(std::size_t target) const {
    auto it = done_.find(target);
    return it == done_.end() ? nullptr : &it->second;
  }

  void record(std::size_t target, const TargetResponses& responses) {
    if (path_.empty()) return;
    ordered_json rec;
    rec["target"] = target;
    ordered_json list = ordered_json::array();
    for (const auto& r : responses) list.push_back(r ? ordered_json(*r) : ordered_json());
    rec["responses"] = std::move(list);
    std::lock_guard lock(mutex_);
    out_ << rec.dump() << '\n';
    out_.flush();
  }

 private:
  void load(const std::string& fingerprint, std::size_t trees) {
    std::ifstream in(path_);
    std::string line;
    if (!std::getline(in, line)) return;
    const json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("fingerprint", std::string()) != fingerprint ||
        header.value("trees", std::size_t{0}) != trees)
      throw ConfigError("checkpoint " + path_.string() + " was written by a different configuration");
    while (std::getline(in, line)) {
      const json rec = json::parse(line, nullptr, false);
      if (rec.is_discarded()) break;  // torn final line from an interrupted write
      TargetResponses responses;
      for (const auto& r : rec.at("responses"))
        responses.push_back(r.is_string() ? std::optional<std::string>(r.get<std::string>()) : std::nullopt);
      if (responses.size() != trees) throw DataError("checkpoint record has the wrong tree count");
      done_[rec.at("target").get<std::size_t>()] = std::move(responses);
    }
  }

  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mutex_;
  std::map<std::size_t, TargetResponses> done_;
};

}  // namespace

ForestResult impute_all(const Table& table, const ForestConfig& config, Backend& backend,
                        const ImputeOptions& options) {
  config.validate();
  const std::size_t m = config.trees;

  std::vector<std::size_t> targets;
  for (std::size_t r = 0; r < table.rows(); ++r)
    for (std::size_t j = 0; j < table.cols(); ++j)
      if (table.missing(r, j)) {
        targets.push_back(r);
        break;
      }

  ForestResult result;
  const auto stats = feature_stats(table);
  const auto graphs = build_all(table, config.graph, config.workers);
  for (std::size_t t = 0; t < m; ++t) result.trees.push_back(grow_tree(graphs, targets, t, config));

  Checkpoint checkpoint(options, m);
  std::vector<TargetResponses> responses(targets.size());
  std::vector<std::uint8_t> finished(targets.size(), 0);
  std::atomic<bool> aborted{false};
  std::atomic<std::size_t> calls{0};
  std::mutex error_mutex;
  std::string error_message;

  parallel_for(targets.size(), config.workers, [&](std::size_t i) {
    if (aborted) return;
    const std::size_t target = targets[i];
    if (const auto* saved = checkpoint.find(target)) {
      responses[i] = *saved;
      finished[i] = 1;
      return;
    }
    TargetResponses local(m);
    try {
      for (std::size_t t = 0; t < m; ++t) {
        const auto bundle = build_prompt(target, result.trees[t].neighbors[i], stats, table,
                                         config.prompt_template, config.prompt);
        if (!bundle) continue;
        local[t] = backend.complete(*bundle, t);
        ++calls;
      }
    } catch (const BackendError& e) {
      std::lock_guard lock(error_mutex);
      if (!aborted.exchange(true)) error_message = e.what();
      return;
    }
    checkpoint.record(target, local);
    responses[i] = std::move(local);
    finished[i] = 1;
  });
  result.backend_calls = calls;

  if (aborted) {
    const auto completed = static_cast<std::size_t>(std::count(finished.begin(), finished.end(), 1));
    throw ImputationAborted("backend failure: " + error_message, completed, targets.size());
  }

  std::vector<Cell> cells = table.cells();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::size_t target = targets[i];
    std::vector<std::size_t> missing_cols;
    std::vector<std::string> missing_names;
    for (std::size_t j = 0; j < table.cols(); ++j)
      if (table.missing(target, j)) {
        missing_cols.push_back(j);
        missing_names.push_back(table.column(j).name);
      }

    std::vector<std::optional<ParseResult>> parsed(m);
    for (std::size_t t = 0; t < m; ++t) {
      if (!responses[i][t]) continue;
      parsed[t] = parse_response(*responses[i][t], missing_names, table.columns(), t);
      if (parsed[t]->parse_failure) ++result.parse_failures;
    }

    for (std::size_t k = 0; k < missing_cols.size(); ++k) {
      const std::size_t j = missing_cols[k];
      CellLedger cell;
      cell.row = target;
      cell.column = j;
      cell.feature = missing_names[k];
      for (std::size_t t = 0; t < m; ++t) {
        if (!parsed[t]) {
          cell.unimputed_trees.push_back(t);
          continue;
        }
        const auto& p = *parsed[t];
        auto vote = std::find_if(p.votes.begin(), p.votes.end(),
                                 [&](const ImputationVote& v) { return v.column == j; });
        if (vote != p.votes.end()) {
          cell.votes.push_back(*vote);
        } else if (std::find(p.invalid.begin(), p.invalid.end(), cell.feature) != p.invalid.end()) {
          cell.invalid_trees.push_back(t);
        } else {
          cell.unimputed_trees.push_back(t);
        }
      }

      if (!cell.votes.empty()) {
        const auto outcome = weighted_vote(cell.votes, config.voting, config.weights);
        cell.winner = outcome.value;
        cell.confidence = outcome.confidence;
      } else {
        std::set<std::size_t> donors;
        for (const auto& tree : result.trees)
          for (const auto& n : tree.neighbors[i].ranked)
            if (n.entry != target && !table.missing(n.entry, j)) donors.insert(n.entry);
        std::vector<Cell> donor_values;
        for (std::size_t e : donors) donor_values.push_back(table.cell(e, j));
        if (!donor_values.empty()) {
          cell.winner = mode_of(donor_values);
          cell.fallback = Fallback::neighbor_mode;
        } else {
          cell.winner = stats.columns[j].mode;
          cell.fallback = Fallback::global_mode;
        }
      }
      cells[target * table.cols() + j] = cell.winner;
      result.ledger.push_back(std::move(cell));
    }
  }
  result.imputed = table.with_cells(std::move(cells));
  return result;
}

}  // namespace llmforest
