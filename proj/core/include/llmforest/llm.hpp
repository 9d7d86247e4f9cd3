#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "llmforest/prompt.hpp"
#include "llmforest/table.hpp"

namespace llmforest {

enum class Confidence { high, medium, low };

std::string_view to_string(Confidence c);
/// Case-insensitive "high" / "medium" / "low".
std::optional<Confidence> parse_confidence(std::string_view text);

struct ImputationVote {
  std::string feature;
  std::size_t column = 0;
  Cell value;
  Confidence confidence = Confidence::medium;
  std::size_t tree_id = 0;
};

/// Per-call accounting: votes.size() + unimputed.size() + invalid.size()
/// equals the number of requested features.
struct ParseResult {
  std::vector<ImputationVote> votes;
  std::vector<std::string> unimputed;  // absent from the response
  std::vector<std::string> invalid;    // present but not a valid value
  bool parse_failure = false;          // no JSON object found
};

/// Finds the first well-formed JSON object in free text (prose, code fences).
std::optional<std::string> extract_json_object(std::string_view text);

/// Validates each requested feature's value against the column: categories
/// must match R_j (exactly, then case-insensitively); continuous columns
/// accept any finite number; numeric-coded categorical columns must hit R_j.
ParseResult parse_response(std::string_view text, std::span<const std::string> target_missing,
                           std::span<const FeatureSpec> schema, std::size_t tree_id);

struct BackendConfig {
  enum class Kind { http, mock };
  enum class MockPolicy { neighbor_mode, echo_fixture };

  Kind kind = Kind::mock;
  // http
  std::string endpoint;  // e.g. https://api.openai.com/v1/chat/completions
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  double timeout_seconds = 60.0;
  int max_retries = 3;
  double rate_limit_per_minute = 60.0;  // 0 disables
  double temperature = 0.0;
  double backoff_seconds = 1.0;         // first retry delay, doubled per retry
  std::filesystem::path audit_log;      // JSON lines; empty disables
  // mock
  MockPolicy mock_policy = MockPolicy::neighbor_mode;
  std::size_t mock_high_agreement = 3;  // agreeing neighbors for "High"
  std::filesystem::path fixture;        // echo_fixture: response text file

  void validate() const;
};

class BackendError : public std::runtime_error {
 public:
  enum class Kind { network, auth, rate_limit, config, mock };
  BackendError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Completion contract. Implementations must tolerate concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const PromptBundle& bundle, std::size_t tree_id) = 0;
};

/// Offline stand-in. neighbor_mode answers every missing feature with the
/// most frequent neighbor value (ties -> smallest; continuous -> mean) and
/// reports High when at least `mock_high_agreement` neighbors agree.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(BackendConfig config);
  std::string complete(const PromptBundle& bundle, std::size_t tree_id) override;

 private:
  BackendConfig config_;
  std::string fixture_text_;
};

/// OpenAI-compatible chat-completions client with retries, backoff, a
/// per-minute rate limiter and an optional JSON-lines audit log.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(BackendConfig config);
  std::string complete(const PromptBundle& bundle, std::size_t tree_id) override;

  /// Request body sent for a bundle.
  std::string request_body(const PromptBundle& bundle) const;

 private:
  void wait_for_slot();
  void audit(const PromptBundle& bundle, std::size_t tree_id, const std::string& raw);

  BackendConfig config_;
  std::string scheme_host_;
  std::string path_;
  std::mutex rate_mutex_;
  double next_slot_ = 0.0;  // steady-clock seconds
  std::mutex audit_mutex_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

}  // namespace llmforest
