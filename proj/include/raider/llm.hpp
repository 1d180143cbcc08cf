#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace raider {

using Json = nlohmann::json;

enum class Role { System, User, Assistant };

std::string_view to_string(Role r);
Role role_from_string(std::string_view s);

/// Tool results and warnings travel as user messages.
struct ChatMessage {
  Role role = Role::User;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

Json to_json(const ChatMessage& m);

enum class BackendKind { Scripted, Live };

struct ChatConfig {
  BackendKind backend = BackendKind::Scripted;
  std::string model = "gpt-4o-2024-05-13";
  double temperature = 0.0;
  std::chrono::milliseconds request_timeout{20000};
  /// Full URL of the chat-completions endpoint; falls back to
  /// RAIDER_LLM_ENDPOINT.
  std::string endpoint;
  /// Falls back to RAIDER_LLM_API_KEY.
  std::string api_key;
  int max_retries = 2;
};

/// Reads RAIDER_LLM_ENDPOINT / RAIDER_LLM_API_KEY into empty fields.
ChatConfig with_env_defaults(ChatConfig config);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  /// Blocking; must return or throw TimeoutError within `timeout`.
  virtual ChatMessage complete(std::span<const ChatMessage> messages, const ChatConfig& config,
                               std::chrono::milliseconds timeout) = 0;

  ChatMessage complete(std::span<const ChatMessage> messages, const ChatConfig& config) {
    return complete(messages, config, config.request_timeout);
  }
};

struct ScriptedStep {
  std::string response;
  /// Each substring must occur in some incoming message.
  std::vector<std::string> expect_contains;
  /// Simulated generation latency.
  std::chrono::milliseconds delay{0};
};

struct ScriptedTranscript {
  std::vector<ScriptedStep> steps;

  static ScriptedTranscript from_responses(std::vector<std::string> responses);
  /// Accepts either an array of strings / step objects, or an object with a
  /// "responses" array.
  static ScriptedTranscript from_json(const Json& j);
};

/// Replays assistant responses in order. Deterministic; exhaustion and
/// predicate mismatches throw ScriptError carrying the step index.
class ScriptedBackend : public ChatBackend {
 public:
  explicit ScriptedBackend(ScriptedTranscript transcript);

  using ChatBackend::complete;
  ChatMessage complete(std::span<const ChatMessage> messages, const ChatConfig& config,
                       std::chrono::milliseconds timeout) override;

  std::size_t consumed() const;
  std::size_t remaining() const;

 private:
  ScriptedTranscript transcript_;
  mutable std::mutex mutex_;
  std::size_t next_ = 0;
};

/// Chat-completions JSON over HTTP(S):
/// {model, temperature, messages: [{role, content}]} -> choices[0].message.
/// Transport failures, 429 and 5xx are retried up to `max_retries` times,
/// each retry logged with its attempt number.
class HttpBackend : public ChatBackend {
 public:
  HttpBackend() = default;

  using ChatBackend::complete;
  ChatMessage complete(std::span<const ChatMessage> messages, const ChatConfig& config,
                       std::chrono::milliseconds timeout) override;

  std::size_t retries() const { return retries_; }

 private:
  std::size_t retries_ = 0;
};

Json chat_request_body(std::span<const ChatMessage> messages, const ChatConfig& config);

std::unique_ptr<ChatBackend> make_backend(const ChatConfig& config,
                                          std::optional<ScriptedTranscript> script = {});

}  // namespace raider
