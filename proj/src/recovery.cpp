#include "raider/recovery.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <utility>

#include "raider/action_model.hpp"
#include "raider/error.hpp"
#include "raider/text.hpp"
#include "raider/tools.hpp"

namespace raider {

// ---------------------------------------------------------------------------
// Prompt

void RecoveryQuery::validate() const {
  if (text::trim(action).empty()) throw ValidationError("recovery query needs an action");
  if (issue != OutcomeLabel::Ambiguity && issue != OutcomeLabel::Unfeasibility)
    throw ValidationError(
        fmt::format("cannot recover from outcome '{}'", raider::to_string(issue)));
}

RecoveryQuery RecoveryQuery::from_outcome(std::string action, const AgentOutcome& outcome,
                                          const Scene& scene) {
  RecoveryQuery q{std::move(action), outcome.label, outcome.explanation, scene.robot().holding};
  q.validate();
  return q;
}

std::string_view to_string(RecoveryContext c) {
  switch (c) {
    case RecoveryContext::Explanation: return "explanation";
    case RecoveryContext::Scene: return "scene";
    case RecoveryContext::ExplanationAndScene: return "explanation+scene";
  }
  return "?";
}

std::optional<RecoveryContext> recovery_context_from_string(std::string_view s) {
  const std::string v = text::to_lower(s);
  if (v == "explanation") return RecoveryContext::Explanation;
  if (v == "scene") return RecoveryContext::Scene;
  if (v == "explanation+scene" || v == "explanation_and_scene" || v == "scene+explanation")
    return RecoveryContext::ExplanationAndScene;
  return std::nullopt;
}

std::vector<ChatMessage> build_recovery_messages(const RecoveryQuery& query,
                                                 RecoveryContext context,
                                                 std::string_view scene_description,
                                                 const TemplateSet& templates) {
  query.validate();
  const bool with_scene = context != RecoveryContext::Explanation;
  const bool with_explanation = context != RecoveryContext::Scene;
  if (with_scene && text::trim(scene_description).empty())
    throw ValidationError("scene variants need a scene description");

  const std::vector<std::string> sections = {
      chomp(templates.get("recovery_objective")),
      chomp(templates.get("recovery_actions")),
      chomp(templates.get("recovery_note")),
      "Examples:",
      chomp(templates.get("recovery_example_ambiguity")),
      chomp(templates.get("recovery_example_blockage")),
      chomp(templates.get("recovery_example_impossible")),
  };

  std::vector<std::string> context_lines;
  if (with_explanation) context_lines.push_back("Explanation: " + query.explanation);
  if (with_scene) context_lines.push_back("Scene:\n" + chomp(std::string(scene_description)));

  const std::string user = chomp(templates.render(
      "recovery_query", {{"action", query.action},
                         {"held", query.held_object.value_or("None")},
                         {"issue", std::string(raider::to_string(query.issue))},
                         {"context", fmt::format("{}", fmt::join(context_lines, "\n"))}}));
  return {{Role::System, fmt::format("{}", fmt::join(sections, "\n\n"))}, {Role::User, user}};
}

std::string build_recovery_prompt(const RecoveryQuery& query, RecoveryContext context,
                                  std::string_view scene_description,
                                  const TemplateSet& templates) {
  const auto messages = build_recovery_messages(query, context, scene_description, templates);
  return messages[0].content + "\n\n" + messages[1].content + "\n";
}

// ---------------------------------------------------------------------------
// Plan language

namespace {

struct ArityRule {
  std::string_view name;
  std::size_t min;
  std::size_t max;
};

constexpr ArityRule kArity[] = {
    {"move", 1, 2}, {"pick", 1, 2}, {"place", 2, 2}, {"open", 1, 1},
    {"close", 1, 1}, {"say", 1, 1}, {"ask", 1, 1},
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool token_char(char c) { return ident_char(c) || c == '.' || c == '-'; }

struct RawArg {
  bool quoted = false;
  std::string value;
};

struct RawStatement {
  int line = 0;
  std::optional<std::string> variable;  // binding target
  std::string name;
  std::vector<RawArg> args;
};

// Drops "- ", "* ", "1. ", "2) " prefixes.
std::string_view strip_list_marker(std::string_view s) {
  if (s.size() >= 2 && (s[0] == '-' || s[0] == '*') && s[1] == ' ') return s.substr(2);
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i > 0 && i + 1 < s.size() && (s[i] == '.' || s[i] == ')') && s[i + 1] == ' ')
    return s.substr(i + 2);
  return s;
}

class LineParser {
 public:
  LineParser(std::string_view s, int line) : s_(s), line_(line) {}

  // nullopt when the line is not a statement.
  std::optional<RawStatement> parse() {
    RawStatement st;
    st.line = line_;
    const std::string first = ident();
    if (first.empty()) return std::nullopt;
    if (peek() == '(') {
      st.name = first;
    } else {
      ws();
      if (peek() != '=' || peek(1) == '=') return std::nullopt;
      ++pos_;
      ws();
      const std::string callee = ident();
      if (callee.empty() || peek() != '(') return std::nullopt;
      if (callee != "ask") fail(fmt::format("only ask(...) can be assigned, not {}(...)", callee));
      st.variable = first;
      st.name = callee;
    }
    ++pos_;  // '('
    args(st);
    ws();
    if (pos_ < s_.size() && s_[pos_] != '#' && s_[pos_] != ';')
      fail(fmt::format("unexpected text after statement: '{}'", s_.substr(pos_)));
    return st;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw PlanError(msg, line_); }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }

  void ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::string ident() {
    if (!ident_start(peek())) return {};
    const auto start = pos_;
    while (ident_char(peek())) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  void args(RawStatement& st) {
    ws();
    if (peek() == ')') {
      ++pos_;
      return;
    }
    while (true) {
      ws();
      const char c = peek();
      if (c == '"' || c == '\'') {
        st.args.push_back({true, quoted()});
      } else if (token_char(c)) {
        const auto start = pos_;
        while (token_char(peek())) ++pos_;
        st.args.push_back({false, std::string(s_.substr(start, pos_ - start))});
      } else {
        fail(fmt::format("unparseable argument list in {}(...)", st.name));
      }
      ws();
      if (peek() == ')') {
        ++pos_;
        return;
      }
      if (peek() != ',') fail(fmt::format("unparseable argument list in {}(...)", st.name));
      ++pos_;
    }
  }

  std::string quoted() {
    const char q = s_[pos_++];
    std::string out;
    while (pos_ < s_.size()) {
      const char c = s_[pos_++];
      if (c == '\\' && pos_ < s_.size()) {
        out += s_[pos_++];
      } else if (c == q) {
        return out;
      } else {
        out += c;
      }
    }
    fail("unterminated string");
  }

  std::string_view s_;
  int line_;
  std::size_t pos_ = 0;
};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

RecoveryPlan parse_plan(std::string_view text, const std::set<std::string>& allowed) {
  std::vector<RawStatement> raw;
  int line_no = 0;
  for (const auto& line : text::split_lines(text)) {
    ++line_no;
    const std::string trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.rfind("```", 0) == 0) continue;
    if (auto st = LineParser(strip_list_marker(trimmed), line_no).parse())
      raw.push_back(std::move(*st));
  }

  std::set<std::string> all_bound;
  for (const auto& st : raw) {
    if (st.variable) all_bound.insert(*st.variable);
  }

  RecoveryPlan plan;
  plan.allowed = allowed;
  std::set<std::string> bound;
  for (const auto& st : raw) {
    if (!allowed.count(st.name)) throw PlanError(fmt::format("unknown action '{}'", st.name), st.line);
    for (const auto& rule : kArity) {
      if (rule.name == st.name && (st.args.size() < rule.min || st.args.size() > rule.max))
        throw PlanError(rule.min == rule.max
                            ? fmt::format("{} takes {} argument(s), got {}", st.name, rule.min,
                                          st.args.size())
                            : fmt::format("{} takes {} to {} arguments, got {}", st.name,
                                          rule.min, rule.max, st.args.size()),
                        st.line);
    }
    if (st.name == "ask" && !st.args.front().quoted)
      throw PlanError("ask needs a string literal question", st.line);

    if (st.variable) {
      plan.statements.push_back({PlanBinding{*st.variable, st.args.front().value}, st.line});
      bound.insert(*st.variable);
      continue;
    }
    PlanCall call{st.name, {}};
    for (const auto& a : st.args) {
      if (a.quoted) {
        call.args.push_back({PlanArg::Kind::String, a.value});
      } else if (bound.count(a.value)) {
        call.args.push_back({PlanArg::Kind::Variable, a.value});
      } else if (all_bound.count(a.value)) {
        throw PlanError(fmt::format("variable '{}' is used before it is bound", a.value),
                        st.line);
      } else {
        call.args.push_back({PlanArg::Kind::Symbol, a.value});
      }
    }
    plan.statements.push_back({std::move(call), st.line});
  }
  return plan;
}

std::string render_statement(const PlanStatement& statement) {
  if (const auto* b = std::get_if<PlanBinding>(&statement.body))
    return fmt::format("{} = ask({})", b->variable, quote(b->question));
  const auto& c = std::get<PlanCall>(statement.body);
  std::vector<std::string> args;
  for (const auto& a : c.args)
    args.push_back(a.kind == PlanArg::Kind::String ? quote(a.value) : a.value);
  return fmt::format("{}({})", c.name, fmt::join(args, ", "));
}

std::string render_plan(const RecoveryPlan& plan) {
  std::string out;
  for (const auto& s : plan.statements) out += render_statement(s) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Interaction

ScriptedChannel::ScriptedChannel(std::vector<ScriptedAnswer> answers)
    : answers_(answers.begin(), answers.end()) {}

ScriptedChannel ScriptedChannel::from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("channel script must be an array");
  std::vector<ScriptedAnswer> answers;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& item = j[i];
    if (item.is_string()) {
      answers.push_back({item.get<std::string>(), {}});
    } else if (item.is_object() && item.contains("answer") && item["answer"].is_string()) {
      ScriptedAnswer a{item["answer"].get<std::string>(), {}};
      for (const auto& m : item.value("mutations", Json::array()))
        a.mutations.push_back(mutation_from_json(m));
      answers.push_back(std::move(a));
    } else {
      throw ParseError("expected a string or an object with 'answer'", fmt::format("[{}]", i));
    }
  }
  return ScriptedChannel(std::move(answers));
}

std::string ScriptedChannel::ask(std::string_view question, std::chrono::milliseconds) {
  questions_.emplace_back(question);
  if (answers_.empty())
    throw TimeoutError(fmt::format("no answer for question '{}'", question));
  ScriptedAnswer a = std::move(answers_.front());
  answers_.pop_front();
  for (auto& m : a.mutations) pending_.push_back(std::move(m));
  return a.answer;
}

void ScriptedChannel::emit(std::string_view utterance) { utterances_.emplace_back(utterance); }

std::vector<SceneMutation> ScriptedChannel::take_mutations() {
  return std::exchange(pending_, {});
}

void ScriptedChannel::queue_mutation(SceneMutation m) { pending_.push_back(std::move(m)); }

// ---------------------------------------------------------------------------
// Execution

std::string_view to_string(ExecutionEntry::Kind k) {
  switch (k) {
    case ExecutionEntry::Kind::Asked: return "asked";
    case ExecutionEntry::Kind::Said: return "said";
    case ExecutionEntry::Kind::Applied: return "applied";
    case ExecutionEntry::Kind::Refused: return "refused";
    case ExecutionEntry::Kind::SceneChanged: return "scene_changed";
    case ExecutionEntry::Kind::Failed: return "failed";
  }
  return "?";
}

std::vector<std::string> ExecutionLog::utterances() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (e.kind == ExecutionEntry::Kind::Said || e.kind == ExecutionEntry::Kind::Asked)
      out.push_back(e.kind == ExecutionEntry::Kind::Said ? e.detail : e.statement);
  }
  return out;
}

Json ExecutionLog::to_json() const {
  Json list = Json::array();
  for (const auto& e : entries) {
    Json j = {{"kind", to_string(e.kind)},
              {"step", e.step},
              {"statement", e.statement},
              {"detail", e.detail}};
    if (e.variable) j["variable"] = *e.variable;
    list.push_back(std::move(j));
  }
  return {{"entries", list},
          {"bindings", bindings},
          {"completed", completed},
          {"halt_reason", halt_reason}};
}

namespace {

// Exact object id, human name, then fuzzy match; raw text otherwise.
std::string resolve_target(std::string_view raw, const Scene& scene, double threshold) {
  if (scene.find(raw) != nullptr || scene.find_human(raw) != nullptr) return std::string(raw);
  if (auto id = resolve_argument(raw, scene, threshold)) return *id;
  if (auto name = resolve_human(raw, scene, threshold)) return *name;
  return std::string(raw);
}

bool target_present(const Scene& scene, const std::string& target) {
  const auto* o = scene.find(target);
  return (o != nullptr && o->detectable) || scene.find_human(target) != nullptr;
}

Vec3 approach_point(const Scene& scene, const std::string& target) {
  const Vec3 robot = scene.robot().position;
  Vec3 goal;
  if (const auto* o = scene.find(target)) {
    const auto lo = o->box.min();
    const auto hi = o->box.max();
    goal = {std::clamp(robot.x, lo.x, hi.x), std::clamp(robot.y, lo.y, hi.y), robot.z};
  } else {
    goal = scene.find_human(target)->position;
  }
  const double dx = robot.x - goal.x;
  const double dy = robot.y - goal.y;
  const double d = std::hypot(dx, dy);
  const double standoff = scene.robot().body_radius + 0.05;
  if (d <= standoff) return robot;
  return {goal.x + dx / d * standoff, goal.y + dy / d * standoff, robot.z};
}

struct StepResult {
  bool refused = false;
  std::string detail;
  std::vector<SceneMutation> effects;
};

StepResult plan_physical(const std::string& name, const std::vector<std::string>& args,
                         const Scene& scene) {
  auto refuse = [](std::string check, std::string why) {
    return StepResult{true, fmt::format("precondition {} not met: {}", check, why), {}};
  };
  if (name == "move") {
    const std::string& target = args[0];
    if (args.size() == 1) {
      if (!target_present(scene, target))
        return refuse("is_present " + target, target + " is not present in the scene");
      if (!check_free_path(scene, target))
        return refuse("free_path " + target, "the path to " + target + " is blocked");
      const Vec3 p = approach_point(scene, target);
      return {false, fmt::format("robot moved next to {}", target),
              {mutation::MoveRobot{p}}};
    }
    // move(object, location): carry the object over and leave it there.
    const std::string& location = args[1];
    if (!target_present(scene, target) || scene.find(target) == nullptr)
      return refuse("is_present " + target, target + " is not present in the scene");
    if (scene.find(location) == nullptr || !scene.find(location)->detectable)
      return refuse("is_present " + location, location + " is not present in the scene");
    if (const auto& held = scene.robot().holding)
      return refuse("robot_holding none", "the robot is already holding " + *held);
    const auto& obj = scene.object(target).box;
    const auto& loc = scene.object(location).box;
    return {false, fmt::format("{} moved onto {}", target, location),
            {mutation::MoveObject{target,
                                  {loc.center.x, loc.center.y, loc.top() + obj.half_extents.z}}}};
  }
  const ActionQuery query{name, args};
  const auto report = check_preconditions(query, scene);
  if (!report.supported) return {true, report.unsupported_reason, {}};
  if (const auto* f = report.first_failure()) return refuse(f->rendered(), f->sentence);
  return {false, query.to_string() + " done", action_effects(query, scene)};
}

}  // namespace

ExecutionLog execute_plan(const RecoveryPlan& plan, Scene& scene, InteractionChannel& channel,
                          const ExecutionOptions& options, ExecutionObserver* observer) {
  ExecutionLog log;
  auto record = [&](ExecutionEntry e) {
    log.entries.push_back(std::move(e));
    if (observer) observer->on_entry(log.entries.back());
  };
  auto halt = [&](ExecutionEntry e) {
    log.halt_reason = e.detail;
    record(std::move(e));
    return log;
  };

  for (std::size_t i = 0; i < plan.statements.size(); ++i) {
    const int step = static_cast<int>(i);
    const auto& statement = plan.statements[i];
    const std::string source = render_statement(statement);

    for (const auto& m : channel.take_mutations()) {
      try {
        scene.apply(m);
        record({ExecutionEntry::Kind::SceneChanged, step, source, raider::to_json(m).dump(), {}});
      } catch (const Error& e) {
        record({ExecutionEntry::Kind::Failed, step, source,
                fmt::format("scene change rejected: {}", e.what()), {}});
      }
    }

    if (const auto* b = std::get_if<PlanBinding>(&statement.body)) {
      try {
        const std::string answer = channel.ask(b->question, options.ask_timeout);
        log.bindings[b->variable] = answer;
        record({ExecutionEntry::Kind::Asked, step, source, answer, b->variable});
      } catch (const TimeoutError& e) {
        return halt({ExecutionEntry::Kind::Failed, step, source,
                     fmt::format("channel timeout: {}", e.what()), {}});
      }
      continue;
    }

    const auto& call = std::get<PlanCall>(statement.body);
    std::vector<std::string> args;
    for (const auto& a : call.args) {
      if (a.kind == PlanArg::Kind::Variable) {
        auto it = log.bindings.find(a.value);
        if (it == log.bindings.end())
          return halt({ExecutionEntry::Kind::Failed, step, source,
                       fmt::format("variable '{}' is unbound", a.value), {}});
        args.push_back(it->second);
      } else {
        args.push_back(a.value);
      }
    }

    if (call.name == "say") {
      channel.emit(args[0]);
      record({ExecutionEntry::Kind::Said, step, source, args[0], {}});
      continue;
    }
    if (call.name == "ask") {
      try {
        const std::string answer = channel.ask(args[0], options.ask_timeout);
        record({ExecutionEntry::Kind::Asked, step, source, answer, {}});
      } catch (const TimeoutError& e) {
        return halt({ExecutionEntry::Kind::Failed, step, source,
                     fmt::format("channel timeout: {}", e.what()), {}});
      }
      continue;
    }

    std::vector<std::string> targets;
    for (const auto& a : args) targets.push_back(resolve_target(a, scene, options.fuzzy_threshold));
    const StepResult result = plan_physical(call.name, targets, scene);
    if (result.refused)
      return halt({ExecutionEntry::Kind::Refused, step, source, result.detail, {}});
    Scene next = scene;
    try {
      for (const auto& m : result.effects) next.apply(m);
    } catch (const Error& e) {
      return halt({ExecutionEntry::Kind::Failed, step, source, e.what(), {}});
    }
    scene = std::move(next);
    record({ExecutionEntry::Kind::Applied, step, source, result.detail, {}});
  }
  log.completed = true;
  return log;
}

RecoveryPlan generate_plan(ChatBackend& backend, const RecoveryQuery& query,
                           RecoveryContext context, std::string_view scene_description,
                           const ChatConfig& chat, const TemplateSet& templates) {
  const auto messages = build_recovery_messages(query, context, scene_description, templates);
  const ChatMessage reply = backend.complete(messages, chat);
  return parse_plan(reply.content);
}

// ---------------------------------------------------------------------------
// Driver

DriverReport run_plan_with_recovery(const std::vector<PlanStep>& steps, Scene& scene,
                                    InteractionChannel& channel, ChatBackend& detector,
                                    ChatBackend& planner, const ToolRegistry& registry,
                                    const DriverConfig& config) {
  DriverReport report;
  ProgramFlowManager pfm(detector, registry, config.detection);
  for (const auto& step : steps) {
    StepReport sr;
    sr.query = step.query;
    for (int attempt = 0;; ++attempt) {
      for (const auto& m : channel.take_mutations()) scene.apply(m);
      sr.detections.push_back(pfm.run(step.query, scene));
      const auto& outcome = sr.detections.back();
      if (outcome.label == OutcomeLabel::NoIssue) {
        sr.cleared = true;
        break;
      }
      if (outcome.label != OutcomeLabel::Ambiguity &&
          outcome.label != OutcomeLabel::Unfeasibility) {
        sr.failure = fmt::format("detection ended with {}", raider::to_string(outcome.label));
        break;
      }
      if (attempt >= config.max_recoveries_per_step) {
        sr.failure = fmt::format("issue persists after {} recoveries", attempt);
        break;
      }
      try {
        const auto query = RecoveryQuery::from_outcome(step.query, outcome, scene);
        const std::string description =
            config.context == RecoveryContext::Explanation ? std::string() : describe_scene(scene);
        sr.plans.push_back(generate_plan(planner, query, config.context, description,
                                         config.planner_chat));
      } catch (const PlanError& e) {
        sr.failure = fmt::format("validation: {}", e.what());
        break;
      } catch (const Error& e) {
        sr.failure = fmt::format("planner: {}", e.what());
        break;
      }
      sr.executions.push_back(execute_plan(sr.plans.back(), scene, channel, config.execution));
      if (!sr.executions.back().completed) {
        sr.failure = "recovery plan halted: " + sr.executions.back().halt_reason;
        break;
      }
    }
    if (sr.cleared && !text::trim(step.action).empty()) {
      try {
        auto log = execute_plan(parse_plan(step.action), scene, channel, config.execution);
        if (!log.completed) {
          sr.cleared = false;
          sr.failure = "step action halted: " + log.halt_reason;
        }
        sr.executions.push_back(std::move(log));
      } catch (const PlanError& e) {
        sr.cleared = false;
        sr.failure = fmt::format("step action: {}", e.what());
      }
    }
    const bool cleared = sr.cleared;
    report.steps.push_back(std::move(sr));
    if (!cleared) return report;
  }
  report.completed = true;
  return report;
}

}  // namespace raider
