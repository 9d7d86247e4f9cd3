#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "llmforest/errors.hpp"
#include "llmforest/llm.hpp"

namespace llmforest {

namespace {

double steady_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void sleep_seconds(double s) {
  if (s > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(s));
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint must include a scheme: " + config_.endpoint);
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_ = config_.endpoint;
    path_ = "/";
  } else {
    scheme_host_ = config_.endpoint.substr(0, path_start);
    path_ = config_.endpoint.substr(path_start);
  }
}

std::string HttpBackend::request_body(const PromptBundle& bundle) const {
  nlohmann::ordered_json body;
  body["model"] = config_.model;
  body["temperature"] = config_.temperature;
  body["messages"] = nlohmann::ordered_json::array({
      {{"role", "system"}, {"content", bundle.system_text}},
      {{"role", "user"}, {"content", bundle.user_text}},
  });
  return body.dump();
}

void HttpBackend::wait_for_slot() {
  if (config_.rate_limit_per_minute <= 0.0) return;
  const double interval = 60.0 / config_.rate_limit_per_minute;
  std::lock_guard lock(rate_mutex_);
  const double now = steady_seconds();
  if (now < next_slot_) sleep_seconds(next_slot_ - now);
  next_slot_ = std::max(now, next_slot_) + interval;
}

void HttpBackend::audit(const PromptBundle& bundle, std::size_t tree_id, const std::string& raw) {
  if (config_.audit_log.empty()) return;
  nlohmann::ordered_json rec;
  rec["timestamp"] = utc_timestamp();
  rec["tree_id"] = tree_id;
  rec["target"] = bundle.target;
  rec["prompt_hash"] = bundle.hash();
  rec["raw_response"] = raw;
  std::lock_guard lock(audit_mutex_);
  std::ofstream out(config_.audit_log, std::ios::app);
  out << rec.dump() << '\n';
}

std::string HttpBackend::complete(const PromptBundle& bundle, std::size_t tree_id) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (!key || !*key)
    throw BackendError(BackendError::Kind::auth, "environment variable " + config_.api_key_env + " is not set");

  const std::string body = request_body(bundle);
  const httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);

  BackendError last(BackendError::Kind::network, "no attempt made");
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) sleep_seconds(config_.backoff_seconds * std::ldexp(1.0, attempt - 1));
    wait_for_slot();

    httplib::Client client(scheme_host_);
    client.set_connection_timeout(timeout_us);
    client.set_read_timeout(timeout_us);
    client.set_write_timeout(timeout_us);
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last = BackendError(BackendError::Kind::network, "request failed: " + httplib::to_string(res.error()));
      continue;
    }
    const int status = res->status;
    if (status == 401 || status == 403)
      throw BackendError(BackendError::Kind::auth, "authentication rejected (HTTP " + std::to_string(status) + ")");
    if (status == 429) {
      last = BackendError(BackendError::Kind::rate_limit, "rate limited after retries (HTTP 429)");
      continue;
    }
    if (status >= 500) {
      last = BackendError(BackendError::Kind::network, "server error (HTTP " + std::to_string(status) + ")");
      continue;
    }
    if (status < 200 || status >= 300)
      throw BackendError(BackendError::Kind::config, "request rejected (HTTP " + std::to_string(status) + "): " + res->body);

    const auto reply = nlohmann::json::parse(res->body, nullptr, false);
    std::string content;
    try {
      content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      last = BackendError(BackendError::Kind::network, "malformed completion response");
      continue;
    }
    audit(bundle, tree_id, content);
    return content;
  }
  throw last;
}

}  // namespace llmforest
