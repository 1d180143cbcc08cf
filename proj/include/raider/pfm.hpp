#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "raider/issue.hpp"
#include "raider/llm.hpp"
#include "raider/prompts.hpp"
#include "raider/scene.hpp"
#include "raider/tool_call.hpp"
#include "raider/tools.hpp"

namespace raider {

// ---------------------------------------------------------------------------
// Parsing

/// Every `call_tool{...}` in order of appearance. Keys may be bare or quoted
/// (single or double quotes); `args` is a bracketed list of string literals
/// or bare tokens. A body that is unbalanced or does not follow that grammar
/// yields a call with `malformed = true`.
std::vector<ToolCall> parse_tool_calls(std::string_view text);

struct FinalResponse {
  OutcomeLabel label;
  std::string explanation;
};

/// First balanced JSON object with a "final_response" key whose label is a
/// recognized issue label.
std::optional<FinalResponse> parse_final_response(std::string_view text);

// ---------------------------------------------------------------------------
// Warnings

enum class WarningKind {
  MadeUpToolResponse,              // final response next to pending tool calls
  MadeUpToolName,                  // tool not in the active toolset
  UnsuccessfulToolCall,            // malformed call or tool failure
  MissingToolCallOrFinalResponse,  // neither calls nor a final response
};

inline constexpr WarningKind kAllWarnings[] = {
    WarningKind::MadeUpToolResponse, WarningKind::MadeUpToolName,
    WarningKind::UnsuccessfulToolCall, WarningKind::MissingToolCallOrFinalResponse};

/// "Made up Tool Response", "Made up Tool Name", ...
std::string_view kind_phrase(WarningKind kind);
/// Snake-case key used in reports: "made_up_tool_response", ...
std::string_view kind_key(WarningKind kind);
int warning_number(WarningKind kind);

struct Warning {
  WarningKind kind;
  std::string message;
};

Warning made_up_tool_response();
Warning made_up_tool_name(const ToolCall& call);
Warning unsuccessful_tool_call(const ToolCall& call, std::string_view reason);
Warning missing_tool_call_or_final_response();

/// Recovers the warning kind from a log message, if it is one.
std::optional<WarningKind> warning_kind_of(const ChatMessage& message);

// ---------------------------------------------------------------------------
// Run

struct RunStats {
  int iterations = 0;
  int tool_calls = 0;
  std::map<WarningKind, int> warnings;
  double elapsed_seconds = 0.0;

  int warning_count(WarningKind kind) const;
  int total_warnings() const;
};

struct AgentOutcome {
  OutcomeLabel label = OutcomeLabel::NoFinalResponse;
  std::string explanation;
  RunStats stats;
  std::vector<ChatMessage> log;
  /// Object ids that tool arguments resolved to, in first-use order.
  std::vector<std::string> grounding;
  /// Backend failure detail for transport_failure.
  std::string error;

  Json to_json() const;
};

enum class MessageKind { SystemPrompt, Query, Assistant, ToolResult, Warning };

/// Hooks into a run. All callbacks run on the run's thread.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_message(const ChatMessage&, MessageKind, std::optional<WarningKind>) {}
  virtual void on_tool_call(const ToolCall&) {}
  virtual void on_outcome(const AgentOutcome&) {}
  /// Called before every model request; the only point where the scene may
  /// change during a run.
  virtual void between_iterations(Scene&) {}
};

struct RunConfig {
  ProcedureVariant variant = ProcedureVariant::QgenGrnd;
  std::string profile = "household";
  ChatConfig chat;
  std::chrono::milliseconds deadline{20000};
  int max_iterations = 12;
  /// Replaces PromptConfig::defaults(profile) when set.
  std::optional<PromptConfig> prompt;
};

/// Regulated loop between the model and the tools: parse calls, execute
/// them, warn, and stop on a final response, the deadline or the iteration
/// cap.
class ProgramFlowManager {
 public:
  ProgramFlowManager(ChatBackend& backend, const ToolRegistry& registry, RunConfig config,
                     const TemplateSet& templates = TemplateSet::defaults());

  AgentOutcome run(std::string_view query, Scene& scene, RunObserver* observer = nullptr);

  const std::string& system_prompt() const { return system_prompt_; }
  const RunConfig& config() const { return config_; }

 private:
  ChatBackend& backend_;
  const ToolRegistry& registry_;
  RunConfig config_;
  const TemplateSet& templates_;
  const ToolsetProfile& profile_;
  std::string system_prompt_;
};

}  // namespace raider
