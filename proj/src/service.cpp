#include "raider/service.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <deque>
#include <fstream>

#include "raider/error.hpp"
#include "raider/text.hpp"

namespace raider {

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::Idle: return "idle";
    case SessionState::Detecting: return "detecting";
    case SessionState::AwaitingAnswer: return "awaiting_answer";
    case SessionState::ExecutingPlan: return "executing_plan";
    case SessionState::Done: return "done";
  }
  return "?";
}

Json Event::to_json() const { return {{"seq", seq}, {"kind", kind}, {"payload", payload}}; }

std::string Event::to_sse() const {
  return fmt::format("id: {}\nevent: {}\ndata: {}\n\n", seq, kind, to_json().dump());
}

SessionConfig SessionConfig::from_json(const Json& j, const ChatConfig& defaults) {
  SessionConfig c;
  c.run.chat = defaults;
  if (j.is_null()) return c;
  if (!j.is_object()) throw ParseError("config must be an object", "config");
  if (j.contains("variant")) {
    const auto v = variant_from_string(j["variant"].get<std::string>());
    if (!v) throw ParseError("unknown procedure variant", "config.variant");
    c.run.variant = *v;
  }
  c.run.profile = j.value("profile", c.run.profile);
  if (j.contains("deadline_ms"))
    c.run.deadline = std::chrono::milliseconds(j["deadline_ms"].get<long long>());
  c.run.max_iterations = j.value("max_iterations", c.run.max_iterations);
  if (j.contains("backend")) {
    const std::string b = j["backend"].get<std::string>();
    if (b == "scripted") {
      c.run.chat.backend = BackendKind::Scripted;
    } else if (b == "live") {
      c.run.chat.backend = BackendKind::Live;
    } else {
      throw ParseError("backend must be 'scripted' or 'live'", "config.backend");
    }
  }
  if (j.contains("script")) c.script = ScriptedTranscript::from_json(j["script"]);
  if (j.contains("planner_script"))
    c.planner_script = ScriptedTranscript::from_json(j["planner_script"]);
  if (j.contains("recovery_context")) {
    const auto rc = recovery_context_from_string(j["recovery_context"].get<std::string>());
    if (!rc) throw ParseError("unknown recovery context", "config.recovery_context");
    c.recovery_context = *rc;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Session

class Session {
 public:
  std::string id;
  SessionConfig config;
  Scene scene;  // published copy; runs work on their own copy
  SessionState state = SessionState::Idle;
  std::vector<Event> events;
  std::deque<SceneMutation> queued;
  std::optional<std::string> pending_question;
  std::optional<std::string> answer;
  std::optional<AgentOutcome> last_outcome;
  std::string last_query;
  std::unique_ptr<ChatBackend> backend;
  std::unique_ptr<ChatBackend> planner;
  bool shutting_down = false;
  std::thread worker;
  mutable std::mutex mutex;
  mutable std::condition_variable cv;

  // Caller holds `mutex`.
  void emit(std::string kind, Json payload) {
    events.push_back({events.size() + 1, std::move(kind), std::move(payload)});
    cv.notify_all();
  }

  void emit_scene_change(const SceneMutation& m, const std::optional<std::string>& error) {
    Json p = {{"mutation", raider::to_json(m)}, {"applied", !error}};
    if (error) p["error"] = *error;
    emit("scene_changed", std::move(p));
  }

  void join() {
    if (worker.joinable()) worker.join();
  }
};

namespace {

Json outcome_payload(const AgentOutcome& o, const std::string& query) {
  Json j = o.to_json();
  j.erase("log");
  j["query"] = query;
  return j;
}

std::string_view source_of(MessageKind k) {
  switch (k) {
    case MessageKind::SystemPrompt: return "system_prompt";
    case MessageKind::Query: return "query";
    case MessageKind::Assistant: return "assistant";
    case MessageKind::ToolResult: return "tool_result";
    case MessageKind::Warning: return "warning";
  }
  return "?";
}

class SessionRunObserver : public RunObserver {
 public:
  explicit SessionRunObserver(Session& s) : s_(s) {}

  void on_message(const ChatMessage& m, MessageKind kind,
                  std::optional<WarningKind> warning) override {
    std::lock_guard lock(s_.mutex);
    Json p = {{"message", to_json(m)}, {"source", source_of(kind)}};
    if (kind == MessageKind::ToolResult) {
      s_.emit("tool_result", std::move(p));
    } else if (kind == MessageKind::Warning && warning) {
      p["warning"] = kind_phrase(*warning);
      p["number"] = warning_number(*warning);
      s_.emit("warning", std::move(p));
    } else {
      s_.emit("llm_message", std::move(p));
    }
  }

  void on_tool_call(const ToolCall& call) override {
    std::lock_guard lock(s_.mutex);
    Json p = {{"tool", call.tool}, {"args", call.args}, {"source", call.source},
              {"malformed", call.malformed}};
    if (call.malformed) p["error"] = call.error;
    s_.emit("tool_call", std::move(p));
  }

  void between_iterations(Scene& working) override {
    std::lock_guard lock(s_.mutex);
    bool changed = false;
    while (!s_.queued.empty()) {
      const SceneMutation m = std::move(s_.queued.front());
      s_.queued.pop_front();
      try {
        working.apply(m);
        s_.emit_scene_change(m, std::nullopt);
        changed = true;
      } catch (const Error& e) {
        s_.emit_scene_change(m, std::string(e.what()));
      }
    }
    if (changed) s_.scene = working;
  }

 private:
  Session& s_;
};

class SessionChannel : public InteractionChannel {
 public:
  explicit SessionChannel(Session& s) : s_(s) {}

  std::string ask(std::string_view question, std::chrono::milliseconds timeout) override {
    std::unique_lock lock(s_.mutex);
    s_.pending_question = std::string(question);
    s_.answer.reset();
    s_.state = SessionState::AwaitingAnswer;
    s_.emit("ask_pending", {{"question", question}});
    const bool ok = s_.cv.wait_for(lock, timeout, [&] { return s_.answer || s_.shutting_down; });
    s_.pending_question.reset();
    s_.state = SessionState::ExecutingPlan;
    if (!ok || !s_.answer) throw TimeoutError(fmt::format("no answer to '{}'", question));
    return *std::exchange(s_.answer, std::nullopt);
  }

  void emit(std::string_view utterance) override {
    std::lock_guard lock(s_.mutex);
    s_.emit("utterance", {{"text", utterance}});
  }

  std::vector<SceneMutation> take_mutations() override {
    std::lock_guard lock(s_.mutex);
    std::vector<SceneMutation> out(std::make_move_iterator(s_.queued.begin()),
                                   std::make_move_iterator(s_.queued.end()));
    s_.queued.clear();
    return out;
  }

 private:
  Session& s_;
};

class SessionPlanObserver : public ExecutionObserver {
 public:
  SessionPlanObserver(Session& s, const Scene& working) : s_(s), working_(working) {}

  void on_entry(const ExecutionEntry& e) override {
    std::lock_guard lock(s_.mutex);
    s_.scene = working_;
    if (e.kind == ExecutionEntry::Kind::SceneChanged) {
      s_.emit("scene_changed", {{"mutation", Json::parse(e.detail)}, {"applied", true}});
      return;
    }
    Json p = {{"step", e.step},
              {"statement", e.statement},
              {"kind", to_string(e.kind)},
              {"detail", e.detail}};
    if (e.variable) p["variable"] = *e.variable;
    s_.emit("plan_step", std::move(p));
  }

 private:
  Session& s_;
  const Scene& working_;
};

void require_state(const Session& s, std::initializer_list<SessionState> allowed,
                   std::string_view command) {
  if (std::find(allowed.begin(), allowed.end(), s.state) == allowed.end())
    throw ConflictError(
        fmt::format("cannot {} while session {} is {}", command, s.id, to_string(s.state)));
}

}  // namespace

// ---------------------------------------------------------------------------
// Manager

SessionManager::SessionManager(ServiceConfig config)
    : config_(std::move(config)), registry_(ToolRegistry::standard(config_.registry)) {}

SessionManager::~SessionManager() {
  std::map<std::string, std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lock(mutex_);
    sessions = sessions_;
  }
  for (auto& [_, s] : sessions) {
    {
      std::lock_guard lock(s->mutex);
      s->shutting_down = true;
      s->cv.notify_all();
    }
    s->join();
  }
}

std::shared_ptr<Session> SessionManager::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError(fmt::format("no session '{}'", id));
  return it->second;
}

std::string SessionManager::create(const Json& request) {
  if (!request.is_object()) throw ParseError("request body must be an object");
  auto s = std::make_shared<Session>();
  if (request.contains("scene")) {
    s->scene = Scene::from_json(request["scene"]);
  } else if (request.contains("scene_file")) {
    const std::filesystem::path rel = request["scene_file"].get<std::string>();
    for (const auto& part : rel) {
      if (part == "..") throw ValidationError("scene_file must stay inside the scene root");
    }
    if (rel.is_absolute()) throw ValidationError("scene_file must be relative");
    s->scene = load_scene_file((config_.scene_root / rel).string());
  } else {
    throw ParseError("request needs 'scene' or 'scene_file'");
  }
  s->config = SessionConfig::from_json(request.value("config", Json()), config_.chat);
  try {
    registry_.profile(s->config.run.profile);
  } catch (const NotFoundError& e) {
    throw ValidationError(e.what(), "config.profile");
  }
  const ChatConfig chat = with_env_defaults(s->config.run.chat);
  if (chat.backend == BackendKind::Live) {
    s->backend = make_backend(chat);
    s->planner = make_backend(chat);
  } else {
    s->backend = make_backend(chat, s->config.script.value_or(ScriptedTranscript{}));
    if (s->config.planner_script) s->planner = make_backend(chat, s->config.planner_script);
  }
  std::lock_guard lock(mutex_);
  s->id = fmt::format("s{}", next_id_++);
  sessions_[s->id] = s;
  return s->id;
}

void SessionManager::start_detection(const std::string& id, std::string_view query) {
  auto s = get(id);
  if (text::trim(query).empty()) throw ValidationError("query must not be empty", "query");
  std::lock_guard lock(s->mutex);
  require_state(*s, {SessionState::Idle}, "start detection");
  s->join();
  s->state = SessionState::Detecting;
  s->last_query = std::string(query);
  s->worker = std::thread([this, s, q = std::string(query)] {
    Scene working;
    {
      std::lock_guard lock(s->mutex);
      working = s->scene;
    }
    SessionRunObserver observer(*s);
    AgentOutcome outcome;
    try {
      ProgramFlowManager pfm(*s->backend, registry_, s->config.run);
      outcome = pfm.run(q, working, &observer);
    } catch (const std::exception& e) {
      outcome.label = OutcomeLabel::TransportFailure;
      outcome.error = e.what();
    }
    std::lock_guard lock(s->mutex);
    s->scene = working;
    s->emit("outcome", outcome_payload(outcome, q));
    s->last_outcome = std::move(outcome);
    s->state = SessionState::Idle;
    s->cv.notify_all();
  });
}

void SessionManager::submit_answer(const std::string& id, std::string_view answer) {
  auto s = get(id);
  std::lock_guard lock(s->mutex);
  if (s->state != SessionState::AwaitingAnswer || !s->pending_question || s->answer)
    throw ConflictError(fmt::format("session {} has no pending question", id));
  s->answer = std::string(answer);
  s->state = SessionState::ExecutingPlan;
  s->cv.notify_all();
}

void SessionManager::mutate(const std::string& id, const Json& mutation) {
  auto s = get(id);
  const SceneMutation m = mutation_from_json(mutation);
  std::lock_guard lock(s->mutex);
  require_state(*s,
                {SessionState::Idle, SessionState::Detecting, SessionState::AwaitingAnswer,
                 SessionState::ExecutingPlan},
                "mutate the scene");
  Scene trial = s->scene;
  trial.apply(m);  // throws without side effects
  if (s->state == SessionState::Idle) {
    s->scene = std::move(trial);
    s->emit_scene_change(m, std::nullopt);
  } else {
    s->queued.push_back(m);
  }
}

void SessionManager::recover(const std::string& id, const Json& request) {
  auto s = get(id);
  std::string plan_text;
  RecoveryQuery query;
  std::string description;
  {
    std::lock_guard lock(s->mutex);
    require_state(*s, {SessionState::Idle}, "recover");
    if (request.contains("plan")) {
      plan_text = request["plan"].get<std::string>();
    } else {
      if (!s->last_outcome) throw ConflictError("no detection outcome to recover from");
      if (!s->planner) throw ValidationError("session has no planner configured");
      query = RecoveryQuery::from_outcome(request.value("action", s->last_query), *s->last_outcome,
                                          s->scene);
      if (s->config.recovery_context != RecoveryContext::Explanation)
        description = describe_scene(s->scene);
    }
    s->join();
    s->state = SessionState::ExecutingPlan;
  }

  RecoveryPlan plan;
  try {
    if (plan_text.empty()) {
      const auto messages =
          build_recovery_messages(query, s->config.recovery_context, description);
      plan_text = s->planner->complete(messages, s->config.run.chat).content;
    }
    plan = parse_plan(plan_text);
  } catch (...) {
    std::lock_guard lock(s->mutex);
    s->state = SessionState::Idle;
    throw;
  }

  std::lock_guard lock(s->mutex);
  s->emit("plan_step", {{"kind", "started"}, {"plan", render_plan(plan)}});
  s->worker = std::thread([this, s, plan = std::move(plan)] {
    Scene working;
    {
      std::lock_guard lock(s->mutex);
      working = s->scene;
    }
    SessionChannel channel(*s);
    SessionPlanObserver observer(*s, working);
    ExecutionOptions options;
    options.ask_timeout = config_.ask_timeout;
    options.fuzzy_threshold = registry_.fuzzy_threshold();
    ExecutionLog log;
    try {
      log = execute_plan(plan, working, channel, options, &observer);
    } catch (const std::exception& e) {
      log.halt_reason = e.what();
    }
    std::lock_guard lock(s->mutex);
    s->scene = working;
    s->emit("plan_step", {{"kind", "finished"},
                          {"completed", log.completed},
                          {"halt_reason", log.halt_reason},
                          {"bindings", log.bindings}});
    s->state = SessionState::Idle;
    s->cv.notify_all();
  });
}

void SessionManager::close(const std::string& id) {
  auto s = get(id);
  std::lock_guard lock(s->mutex);
  require_state(*s, {SessionState::Idle}, "close");
  s->state = SessionState::Done;
  s->cv.notify_all();
}

SessionState SessionManager::state(const std::string& id) const {
  auto s = get(id);
  std::lock_guard lock(s->mutex);
  return s->state;
}

Json SessionManager::snapshot(const std::string& id) const {
  auto s = get(id);
  std::lock_guard lock(s->mutex);
  Json free_paths = Json::object();
  for (const auto& o : s->scene.objects()) {
    if (o.detectable) free_paths[o.id] = check_free_path(s->scene, o.id);
  }
  for (const auto& h : s->scene.humans()) free_paths[h.name] = check_free_path(s->scene, h.name);
  Json j = {{"id", s->id},
            {"state", to_string(s->state)},
            {"scene", s->scene.to_json()},
            {"free_paths", free_paths},
            {"event_count", s->events.size()},
            {"queued_mutations", s->queued.size()},
            {"pending_question",
             s->pending_question ? Json(*s->pending_question) : Json()}};
  if (s->last_outcome) j["last_outcome"] = outcome_payload(*s->last_outcome, s->last_query);
  return j;
}

std::vector<Event> SessionManager::events(const std::string& id, std::uint64_t from_seq) const {
  auto s = get(id);
  std::lock_guard lock(s->mutex);
  const std::size_t start = from_seq == 0 ? 0 : from_seq - 1;
  if (start >= s->events.size()) return {};
  return {s->events.begin() + static_cast<std::ptrdiff_t>(start), s->events.end()};
}

std::vector<Event> SessionManager::wait_events(const std::string& id, std::uint64_t from_seq,
                                               std::chrono::milliseconds timeout) const {
  auto s = get(id);
  std::unique_lock lock(s->mutex);
  const std::size_t start = from_seq == 0 ? 0 : from_seq - 1;
  s->cv.wait_for(lock, timeout, [&] {
    return s->events.size() > start || s->state == SessionState::Done || s->shutting_down;
  });
  if (start >= s->events.size()) return {};
  return {s->events.begin() + static_cast<std::ptrdiff_t>(start), s->events.end()};
}

bool SessionManager::wait_settled(const std::string& id, std::chrono::milliseconds timeout) const {
  auto s = get(id);
  std::unique_lock lock(s->mutex);
  return s->cv.wait_for(lock, timeout, [&] {
    return s->state == SessionState::Idle || s->state == SessionState::Done;
  });
}

std::vector<std::string> SessionManager::ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

// ---------------------------------------------------------------------------
// HTTP

namespace {

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const NotFoundError& e) {
      reply(res, 404, {{"error", e.what()}});
    } catch (const ConflictError& e) {
      reply(res, 409, {{"error", e.what()}});
    } catch (const ParseError& e) {
      reply(res, 400, {{"error", e.what()}, {"path", e.path()}});
    } catch (const ValidationError& e) {
      reply(res, 422, {{"error", e.what()}, {"path", e.subject()}});
    } catch (const PlanError& e) {
      reply(res, 422, {{"error", e.what()}, {"line", e.line()}});
    } catch (const Json::exception& e) {
      reply(res, 400, {{"error", e.what()}});
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      reply(res, 500, {{"error", e.what()}});
    }
  };
}

Json body_json(const httplib::Request& req) {
  if (text::trim(req.body).empty()) return Json::object();
  Json j = Json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw ParseError("request body is not valid JSON");
  return j;
}

bool origin_allowed(const std::vector<std::string>& allow, const std::string& origin) {
  if (origin.empty()) return false;
  return std::any_of(allow.begin(), allow.end(),
                     [&](const std::string& a) { return a == "*" || a == origin; });
}

}  // namespace

Server::Server(SessionManager& manager)
    : manager_(manager), http_(std::make_unique<httplib::Server>()) {
  routes();
}

Server::~Server() { stop(); }

void Server::routes() {
  auto& http = *http_;
  auto& m = manager_;
  const auto allow = m.config().cors_allowlist;

  http.set_post_routing_handler([allow](const httplib::Request& req, httplib::Response& res) {
    const std::string origin = req.get_header_value("Origin");
    if (origin_allowed(allow, origin)) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    }
  });
  http.Options(".*", [allow](const httplib::Request& req, httplib::Response& res) {
    const std::string origin = req.get_header_value("Origin");
    if (!origin_allowed(allow, origin)) {
      res.status = 403;
      return;
    }
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID");
    res.status = 204;
  });

  http.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"status", "ok"}});
  });
  http.Get("/sessions", guarded([&m](const httplib::Request&, httplib::Response& res) {
             reply(res, 200, {{"sessions", m.ids()}});
           }));
  http.Post("/sessions", guarded([&m](const httplib::Request& req, httplib::Response& res) {
              const std::string id = m.create(body_json(req));
              reply(res, 201, {{"id", id}, {"state", to_string(m.state(id))}});
            }));
  http.Get(R"(/sessions/([^/]+))",
           guarded([&m](const httplib::Request& req, httplib::Response& res) {
             reply(res, 200, m.snapshot(req.matches[1]));
           }));
  http.Post(R"(/sessions/([^/]+)/detect)",
            guarded([&m](const httplib::Request& req, httplib::Response& res) {
              const Json body = body_json(req);
              m.start_detection(req.matches[1], body.value("query", std::string()));
              reply(res, 202, {{"accepted", true}});
            }));
  http.Post(R"(/sessions/([^/]+)/answer)",
            guarded([&m](const httplib::Request& req, httplib::Response& res) {
              const Json body = body_json(req);
              if (!body.contains("answer") || !body["answer"].is_string())
                throw ValidationError("'answer' must be a string", "answer");
              m.submit_answer(req.matches[1], body["answer"].get<std::string>());
              reply(res, 202, {{"accepted", true}});
            }));
  http.Post(R"(/sessions/([^/]+)/mutate)",
            guarded([&m](const httplib::Request& req, httplib::Response& res) {
              m.mutate(req.matches[1], body_json(req));
              reply(res, 202, {{"accepted", true}});
            }));
  http.Post(R"(/sessions/([^/]+)/recover)",
            guarded([&m](const httplib::Request& req, httplib::Response& res) {
              m.recover(req.matches[1], body_json(req));
              reply(res, 202, {{"accepted", true}});
            }));
  http.Post(R"(/sessions/([^/]+)/close)",
            guarded([&m](const httplib::Request& req, httplib::Response& res) {
              m.close(req.matches[1]);
              reply(res, 200, {{"state", "done"}});
            }));
  http.Get(
      R"(/sessions/([^/]+)/events)",
      guarded([&m](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        std::uint64_t from = 1;
        if (req.has_param("from")) from = std::stoull(req.get_param_value("from"));
        if (req.has_header("Last-Event-ID"))
          from = std::max<std::uint64_t>(from, std::stoull(req.get_header_value("Last-Event-ID")) + 1);
        const std::string follow = req.get_param_value("follow");
        m.state(id);  // 404 before any streaming starts
        if (follow == "0" || follow == "false") {
          std::string body;
          for (const auto& e : m.events(id, from)) body += e.to_sse();
          res.set_content(body, "text/event-stream");
          return;
        }
        res.set_header("Cache-Control", "no-cache");
        auto next = std::make_shared<std::uint64_t>(from);
        res.set_chunked_content_provider(
            "text/event-stream", [&m, id, next](std::size_t, httplib::DataSink& sink) {
              const auto batch = m.wait_events(id, *next, std::chrono::milliseconds(1000));
              if (batch.empty()) {
                if (m.state(id) == SessionState::Done) {
                  sink.done();
                  return true;
                }
                const std::string ping = ": keepalive\n\n";
                return sink.is_writable() && sink.write(ping.data(), ping.size());
              }
              for (const auto& e : batch) {
                const std::string chunk = e.to_sse();
                if (!sink.write(chunk.data(), chunk.size())) return false;
                *next = e.seq + 1;
              }
              return true;
            });
      }));
}

int Server::start() {
  const auto& cfg = manager_.config();
  if (cfg.port == 0) {
    port_ = http_->bind_to_any_port(cfg.host);
  } else {
    if (!http_->bind_to_port(cfg.host, cfg.port))
      throw TransportError(fmt::format("cannot bind {}:{}", cfg.host, cfg.port));
    port_ = cfg.port;
  }
  if (port_ <= 0) throw TransportError(fmt::format("cannot bind {}", cfg.host));
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return port_;
}

void Server::listen() {
  const auto& cfg = manager_.config();
  spdlog::info("listening on {}:{}", cfg.host, cfg.port);
  port_ = cfg.port;
  if (!http_->listen(cfg.host, cfg.port))
    throw TransportError(fmt::format("cannot listen on {}:{}", cfg.host, cfg.port));
}

void Server::stop() {
  if (http_) http_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace raider
