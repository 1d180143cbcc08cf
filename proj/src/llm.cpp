#include "raider/llm.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "raider/error.hpp"

namespace raider {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

Role role_from_string(std::string_view s) {
  if (s == "system") return Role::System;
  if (s == "assistant") return Role::Assistant;
  if (s == "user") return Role::User;
  throw ParseError(fmt::format("unknown role '{}'", s), "role");
}

Json to_json(const ChatMessage& m) {
  return {{"role", to_string(m.role)}, {"content", m.content}};
}

ChatConfig with_env_defaults(ChatConfig config) {
  if (config.endpoint.empty()) {
    if (const char* v = std::getenv("RAIDER_LLM_ENDPOINT")) config.endpoint = v;
  }
  if (config.api_key.empty()) {
    if (const char* v = std::getenv("RAIDER_LLM_API_KEY")) config.api_key = v;
  }
  return config;
}

// ---------------------------------------------------------------------------
// Scripted

ScriptedTranscript ScriptedTranscript::from_responses(std::vector<std::string> responses) {
  ScriptedTranscript t;
  for (auto& r : responses) t.steps.push_back({std::move(r), {}, {}});
  return t;
}

ScriptedTranscript ScriptedTranscript::from_json(const Json& j) {
  const Json& items = j.is_object() ? j.at("responses") : j;
  if (!items.is_array()) throw ParseError("expected an array of scripted responses", "responses");
  ScriptedTranscript t;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Json& item = items[i];
    ScriptedStep step;
    if (item.is_string()) {
      step.response = item.get<std::string>();
    } else if (item.is_object()) {
      if (!item.contains("response") || !item["response"].is_string())
        throw ParseError("missing string field 'response'", fmt::format("responses[{}]", i));
      step.response = item["response"].get<std::string>();
      if (item.contains("expect_contains"))
        step.expect_contains = item["expect_contains"].get<std::vector<std::string>>();
      if (item.contains("delay_ms"))
        step.delay = std::chrono::milliseconds(item["delay_ms"].get<long>());
    } else {
      throw ParseError("expected a string or step object", fmt::format("responses[{}]", i));
    }
    t.steps.push_back(std::move(step));
  }
  return t;
}

ScriptedBackend::ScriptedBackend(ScriptedTranscript transcript)
    : transcript_(std::move(transcript)) {}

std::size_t ScriptedBackend::consumed() const {
  std::lock_guard lock(mutex_);
  return next_;
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mutex_);
  return transcript_.steps.size() - next_;
}

ChatMessage ScriptedBackend::complete(std::span<const ChatMessage> messages, const ChatConfig&,
                                      std::chrono::milliseconds timeout) {
  if (messages.empty() || messages.front().role != Role::System)
    throw ValidationError("conversation must start with a system message");
  ScriptedStep step;
  std::size_t index = 0;
  {
    std::lock_guard lock(mutex_);
    index = next_;
    if (index >= transcript_.steps.size())
      throw ScriptError(fmt::format("script exhausted after {} response(s)", index), index);
    step = transcript_.steps[index];
    ++next_;
  }
  for (const auto& needle : step.expect_contains) {
    const bool found = std::any_of(messages.begin(), messages.end(), [&](const ChatMessage& m) {
      return m.content.find(needle) != std::string::npos;
    });
    if (!found)
      throw ScriptError(
          fmt::format("step {}: expected prompt to contain '{}'", index, needle), index);
  }
  if (step.delay > std::chrono::milliseconds::zero()) {
    if (step.delay > timeout) {
      std::this_thread::sleep_for(timeout);
      throw TimeoutError(fmt::format("scripted step {} exceeded the {} ms request budget", index,
                                     timeout.count()));
    }
    std::this_thread::sleep_for(step.delay);
  }
  return {Role::Assistant, step.response};
}

// ---------------------------------------------------------------------------
// HTTP

Json chat_request_body(std::span<const ChatMessage> messages, const ChatConfig& config) {
  Json msgs = Json::array();
  for (const auto& m : messages) msgs.push_back(to_json(m));
  return {{"model", config.model}, {"temperature", config.temperature}, {"messages", msgs}};
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ValidationError(fmt::format("endpoint '{}' is not an http(s) URL", url));
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

ChatMessage HttpBackend::complete(std::span<const ChatMessage> messages, const ChatConfig& cfg,
                                  std::chrono::milliseconds timeout) {
  const ChatConfig config = with_env_defaults(cfg);
  if (config.endpoint.empty())
    throw TransportError("no chat endpoint configured (set RAIDER_LLM_ENDPOINT)");
  const Endpoint ep = split_url(config.endpoint);
  const std::string body = chat_request_body(messages, config).dump();
  const auto start = std::chrono::steady_clock::now();

  std::string last_error;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    const auto budget = timeout - elapsed;
    if (budget <= std::chrono::milliseconds::zero())
      throw TimeoutError(fmt::format("chat request timed out after {} ms", timeout.count()));
    if (attempt > 0) {
      ++retries_;
      spdlog::warn("chat request retry {}/{} after: {}", attempt, config.max_retries, last_error);
    }

    httplib::Client client(ep.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(budget);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(budget - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);

    auto res = client.Post(ep.path, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      if (std::chrono::steady_clock::now() - start >= timeout)
        throw TimeoutError(fmt::format("chat request timed out after {} ms", timeout.count()));
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = fmt::format("HTTP {}", res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300)
      throw TransportError(fmt::format("chat endpoint returned HTTP {}: {}", res->status,
                                       res->body.substr(0, 200)));
    try {
      const Json reply = Json::parse(res->body);
      const Json& message = reply.at("choices").at(0).at("message");
      return {Role::Assistant, message.at("content").get<std::string>()};
    } catch (const Json::exception& e) {
      throw TransportError(fmt::format("malformed chat completion response: {}", e.what()));
    }
  }
  throw TransportError(
      fmt::format("chat request failed after {} attempt(s): {}", config.max_retries + 1,
                  last_error));
}

std::unique_ptr<ChatBackend> make_backend(const ChatConfig& config,
                                          std::optional<ScriptedTranscript> script) {
  if (config.backend == BackendKind::Live) return std::make_unique<HttpBackend>();
  return std::make_unique<ScriptedBackend>(script ? std::move(*script) : ScriptedTranscript{});
}

}  // namespace raider
