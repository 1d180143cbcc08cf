#pragma once

#include <chrono>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "raider/issue.hpp"
#include "raider/llm.hpp"
#include "raider/pfm.hpp"
#include "raider/scene.hpp"
#include "raider/templates.hpp"

namespace raider {

// ---------------------------------------------------------------------------
// Prompt

struct RecoveryQuery {
  std::string action;
  OutcomeLabel issue = OutcomeLabel::Unfeasibility;
  std::string explanation;
  std::optional<std::string> held_object;

  /// Throws ValidationError unless the issue is ambiguity or unfeasibility
  /// and the action is non-empty.
  void validate() const;
  static RecoveryQuery from_outcome(std::string action, const AgentOutcome& outcome,
                                    const Scene& scene);
};

/// What the query part carries besides the action and the issue label.
enum class RecoveryContext { Explanation, Scene, ExplanationAndScene };

std::string_view to_string(RecoveryContext c);
/// "explanation", "scene", "explanation+scene" (also "explanation_and_scene").
std::optional<RecoveryContext> recovery_context_from_string(std::string_view s);

/// System message (objective, actions, note, worked examples) and the user
/// query. `scene_description` is required for the scene variants.
std::vector<ChatMessage> build_recovery_messages(
    const RecoveryQuery& query, RecoveryContext context = RecoveryContext::Explanation,
    std::string_view scene_description = {},
    const TemplateSet& templates = TemplateSet::defaults());

/// The same text as one string, blank-line separated.
std::string build_recovery_prompt(const RecoveryQuery& query,
                                  RecoveryContext context = RecoveryContext::Explanation,
                                  std::string_view scene_description = {},
                                  const TemplateSet& templates = TemplateSet::defaults());

// ---------------------------------------------------------------------------
// Plan language

struct PlanArg {
  enum class Kind { String, Symbol, Variable };
  Kind kind = Kind::Symbol;
  std::string value;

  friend bool operator==(const PlanArg&, const PlanArg&) = default;
};

struct PlanCall {
  std::string name;
  std::vector<PlanArg> args;

  friend bool operator==(const PlanCall&, const PlanCall&) = default;
};

/// `variable = ask("question")`
struct PlanBinding {
  std::string variable;
  std::string question;

  friend bool operator==(const PlanBinding&, const PlanBinding&) = default;
};

struct PlanStatement {
  std::variant<PlanCall, PlanBinding> body;
  /// 1-based source line; not part of equality.
  int line = 0;

  friend bool operator==(const PlanStatement& a, const PlanStatement& b) {
    return a.body == b.body;
  }
};

inline const std::set<std::string>& default_plan_actions() {
  static const std::set<std::string> actions = {"move",  "pick", "place", "open",
                                                "close", "say",  "ask"};
  return actions;
}

struct RecoveryPlan {
  std::vector<PlanStatement> statements;
  std::set<std::string> allowed = default_plan_actions();

  friend bool operator==(const RecoveryPlan& a, const RecoveryPlan& b) {
    return a.statements == b.statements;
  }
};

/// One statement per line. Lines that are not statements (prose, code
/// fences, list markers' text) are skipped. An identifier argument is a
/// variable iff some `x = ask(...)` binds it. Throws PlanError naming the
/// line for unknown actions, use before binding, bad arity and unparseable
/// argument lists.
RecoveryPlan parse_plan(std::string_view text,
                        const std::set<std::string>& allowed = default_plan_actions());

/// Canonical text: one statement per line, strings double-quoted.
std::string render_plan(const RecoveryPlan& plan);
std::string render_statement(const PlanStatement& statement);

// ---------------------------------------------------------------------------
// Interaction

class InteractionChannel {
 public:
  virtual ~InteractionChannel() = default;
  /// Blocks until answered; throws TimeoutError.
  virtual std::string ask(std::string_view question, std::chrono::milliseconds timeout) = 0;
  virtual void emit(std::string_view utterance) = 0;
  /// Scene changes made by the person since the last call; applied between
  /// plan steps.
  virtual std::vector<SceneMutation> take_mutations() { return {}; }
};

struct ScriptedAnswer {
  std::string answer;
  /// Applied before the step after the ask that consumed this answer.
  std::vector<SceneMutation> mutations;
};

/// Answers asks from a fixed list. Running out of answers is a timeout.
class ScriptedChannel : public InteractionChannel {
 public:
  ScriptedChannel() = default;
  explicit ScriptedChannel(std::vector<ScriptedAnswer> answers);
  /// Array of strings or {answer, mutations} objects.
  static ScriptedChannel from_json(const Json& j);

  std::string ask(std::string_view question, std::chrono::milliseconds timeout) override;
  void emit(std::string_view utterance) override;
  std::vector<SceneMutation> take_mutations() override;

  /// Queued for the next step regardless of asks.
  void queue_mutation(SceneMutation m);
  const std::vector<std::string>& questions() const { return questions_; }
  const std::vector<std::string>& utterances() const { return utterances_; }

 private:
  std::deque<ScriptedAnswer> answers_;
  std::vector<SceneMutation> pending_;
  std::vector<std::string> questions_;
  std::vector<std::string> utterances_;
};

// ---------------------------------------------------------------------------
// Execution

struct ExecutionEntry {
  enum class Kind { Asked, Said, Applied, Refused, SceneChanged, Failed };
  Kind kind;
  int step = 0;  // 0-based statement index
  std::string statement;
  std::string detail;
  /// For Asked: the variable bound, if any.
  std::optional<std::string> variable;
};

std::string_view to_string(ExecutionEntry::Kind k);

struct ExecutionLog {
  std::vector<ExecutionEntry> entries;
  std::map<std::string, std::string> bindings;
  bool completed = false;
  std::string halt_reason;

  std::vector<std::string> utterances() const;
  Json to_json() const;
};

struct ExecutionOptions {
  std::chrono::milliseconds ask_timeout{120000};
  double fuzzy_threshold = 0.72;
};

class ExecutionObserver {
 public:
  virtual ~ExecutionObserver() = default;
  virtual void on_entry(const ExecutionEntry&) {}
};

/// Runs the statements in order. Physical actions are checked against the
/// action model (and a free path for `move`) before their effects are
/// applied; the first refusal halts the plan. Channel mutations are applied
/// before every step.
ExecutionLog execute_plan(const RecoveryPlan& plan, Scene& scene, InteractionChannel& channel,
                          const ExecutionOptions& options = {},
                          ExecutionObserver* observer = nullptr);

/// Asks the backend for a plan and parses it.
RecoveryPlan generate_plan(ChatBackend& backend, const RecoveryQuery& query,
                           RecoveryContext context, std::string_view scene_description,
                           const ChatConfig& chat = {},
                           const TemplateSet& templates = TemplateSet::defaults());

// ---------------------------------------------------------------------------
// Detect / recover / re-detect driver

struct PlanStep {
  /// Query handed to detection, e.g. "approach medicine_counter".
  std::string query;
  /// Plan-language call executed once the step is clear; empty to only
  /// check.
  std::string action;
};

struct StepReport {
  std::string query;
  std::vector<AgentOutcome> detections;
  std::vector<RecoveryPlan> plans;
  std::vector<ExecutionLog> executions;
  bool cleared = false;
  std::string failure;
};

struct DriverReport {
  std::vector<StepReport> steps;
  bool completed = false;
};

struct DriverConfig {
  RunConfig detection;
  ChatConfig planner_chat;
  RecoveryContext context = RecoveryContext::Explanation;
  int max_recoveries_per_step = 3;
  ExecutionOptions execution;
};

/// For each step: detect; on an issue, generate and execute a recovery plan
/// and detect again, up to the retry cap.
DriverReport run_plan_with_recovery(const std::vector<PlanStep>& steps, Scene& scene,
                                    InteractionChannel& channel, ChatBackend& detector,
                                    ChatBackend& planner, const ToolRegistry& registry,
                                    const DriverConfig& config = {});

}  // namespace raider
