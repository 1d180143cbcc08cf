#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "raider/llm.hpp"
#include "raider/pfm.hpp"
#include "raider/recovery.hpp"
#include "raider/scene.hpp"
#include "raider/tools.hpp"

namespace httplib {
class Server;
}

namespace raider {

enum class SessionState { Idle, Detecting, AwaitingAnswer, ExecutingPlan, Done };
std::string_view to_string(SessionState s);

/// llm_message, tool_call, tool_result, warning, outcome, plan_step,
/// ask_pending, utterance, scene_changed.
struct Event {
  std::uint64_t seq = 0;
  std::string kind;
  Json payload;

  Json to_json() const;
  /// "id: N\nevent: kind\ndata: {...}\n\n"
  std::string to_sse() const;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  /// Origins that get CORS headers; "*" allows any.
  std::vector<std::string> cors_allowlist;
  /// Scene files named in requests are looked up here.
  std::filesystem::path scene_root = ".";
  ChatConfig chat;
  RegistryOptions registry;
  std::chrono::milliseconds ask_timeout{120000};
};

/// Per-session settings taken from the create request.
struct SessionConfig {
  RunConfig run;
  std::optional<ScriptedTranscript> script;
  std::optional<ScriptedTranscript> planner_script;
  RecoveryContext recovery_context = RecoveryContext::Explanation;

  static SessionConfig from_json(const Json& j, const ChatConfig& defaults);
};

class Session;

/// Owns every session. Commands are validated against the session state
/// machine and rejected without side effects: ConflictError for a wrong
/// state, NotFoundError for an unknown id, ValidationError / ParseError for
/// bad input.
class SessionManager {
 public:
  explicit SessionManager(ServiceConfig config = {});
  ~SessionManager();
  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  /// {"scene": {...}} or {"scene_file": "relative/path.json"}, plus an
  /// optional "config" object.
  std::string create(const Json& request);
  void start_detection(const std::string& id, std::string_view query);
  void submit_answer(const std::string& id, std::string_view answer);
  /// Applied right away when idle, otherwise queued for the next iteration
  /// or plan step.
  void mutate(const std::string& id, const Json& mutation);
  /// {"plan": "..."} runs the given plan; {} asks the planner for one from
  /// the last outcome ({"action": ...} overrides the action text).
  void recover(const std::string& id, const Json& request);
  void close(const std::string& id);

  SessionState state(const std::string& id) const;
  Json snapshot(const std::string& id) const;
  std::vector<Event> events(const std::string& id, std::uint64_t from_seq) const;
  /// Blocks until an event with seq >= from_seq exists, the session is done,
  /// or the timeout passes.
  std::vector<Event> wait_events(const std::string& id, std::uint64_t from_seq,
                                 std::chrono::milliseconds timeout) const;
  /// Blocks until the session is idle or done.
  bool wait_settled(const std::string& id, std::chrono::milliseconds timeout) const;
  std::vector<std::string> ids() const;

  const ServiceConfig& config() const { return config_; }
  const ToolRegistry& registry() const { return registry_; }

 private:
  std::shared_ptr<Session> get(const std::string& id) const;

  ServiceConfig config_;
  ToolRegistry registry_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

/// HTTP front end:
///   POST /sessions, POST /sessions/{id}/detect|answer|mutate|recover|close,
///   GET /sessions/{id}, GET /sessions/{id}/events?from=N[&follow=0]
class Server {
 public:
  Server(SessionManager& manager);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds (port 0 picks a free one) and serves on a background thread.
  int start();
  /// Serves on the calling thread until stop().
  void listen();
  void stop();
  int port() const { return port_; }

 private:
  void routes();

  SessionManager& manager_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace raider
