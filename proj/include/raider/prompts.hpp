#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "raider/issue.hpp"
#include "raider/templates.hpp"

namespace raider {

/// Which reasoning steps the detection prompt asks for. QGEN_GRND asks for
/// both instance grounding and question generation; BASIC for neither, which
/// leaves a plain think/act/observe cycle.
enum class ProcedureVariant { QgenGrnd, Qgen, Grnd, Basic };

std::string_view to_string(ProcedureVariant v);
/// Accepts "QGEN_GRND", "QGEN", "GRND", "BASIC" (case-insensitive).
std::optional<ProcedureVariant> variant_from_string(std::string_view s);

bool has_grounding_step(ProcedureVariant v);
bool has_question_step(ProcedureVariant v);

struct IssueObjective {
  OutcomeLabel label;
  std::string description;
};

/// The literal line every detection prompt carries so tool calls can be
/// parsed back.
inline constexpr std::string_view kToolCallGrammar = "call_tool{tool: tool_name, args: arg_list}";

struct PromptConfig {
  std::vector<IssueObjective> objectives;
  ProcedureVariant variant = ProcedureVariant::QgenGrnd;
  std::string profile = "household";
  std::string constraints;
  std::string tool_call_format;

  /// Objectives and constraints for a toolset profile: "assistive" adds the
  /// human checks and the handover distance; anything else gets the
  /// household wording.
  static PromptConfig defaults(std::string_view profile = "household",
                               const TemplateSet& templates = TemplateSet::defaults());
};

/// Task objective, procedure steps, tool description, constraints and tool
/// call format, separated by blank lines. Pure: equal inputs give
/// byte-identical prompts.
std::string build_system_prompt(const PromptConfig& config, std::string_view tool_block,
                                const TemplateSet& templates = TemplateSet::defaults());

/// The query followed by the detected object names.
std::string build_user_message(std::string_view query, std::span<const std::string> objects,
                               const TemplateSet& templates = TemplateSet::defaults());

/// The detection prompt with every tool-related part removed and the scene
/// description in their place.
std::string build_visualobs_prompt(const PromptConfig& config, std::string_view scene_description,
                                   const TemplateSet& templates = TemplateSet::defaults());

/// Rendered text of a single procedure step block ("step_grounding", ...),
/// as it appears in the prompts.
std::string procedure_block(std::string_view step, const PromptConfig& config,
                            const TemplateSet& templates = TemplateSet::defaults());

}  // namespace raider
