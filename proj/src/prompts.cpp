#include "raider/prompts.hpp"

#include <fmt/format.h>

#include "raider/error.hpp"
#include "raider/text.hpp"

namespace raider {

std::string_view to_string(ProcedureVariant v) {
  switch (v) {
    case ProcedureVariant::QgenGrnd: return "QGEN_GRND";
    case ProcedureVariant::Qgen: return "QGEN";
    case ProcedureVariant::Grnd: return "GRND";
    case ProcedureVariant::Basic: return "BASIC";
  }
  return "?";
}

std::optional<ProcedureVariant> variant_from_string(std::string_view s) {
  const std::string upper = [&] {
    std::string u(s);
    for (auto& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return u;
  }();
  for (auto v : {ProcedureVariant::QgenGrnd, ProcedureVariant::Qgen, ProcedureVariant::Grnd,
                 ProcedureVariant::Basic}) {
    if (to_string(v) == upper) return v;
  }
  return std::nullopt;
}

bool has_grounding_step(ProcedureVariant v) {
  return v == ProcedureVariant::QgenGrnd || v == ProcedureVariant::Grnd;
}

bool has_question_step(ProcedureVariant v) {
  return v == ProcedureVariant::QgenGrnd || v == ProcedureVariant::Qgen;
}

PromptConfig PromptConfig::defaults(std::string_view profile, const TemplateSet& templates) {
  const bool assistive = profile == "assistive";
  PromptConfig c;
  c.profile = std::string(profile);
  c.objectives = {
      {OutcomeLabel::Ambiguity, chomp(templates.get("objective_ambiguity"))},
      {OutcomeLabel::Unfeasibility,
       chomp(templates.get(assistive ? "objective_unfeasibility_assistive"
                                     : "objective_unfeasibility"))},
      {OutcomeLabel::NoIssue, chomp(templates.get("objective_no_issue"))},
  };
  c.constraints =
      chomp(templates.get(assistive ? "constraints_assistive" : "constraints_household"));
  c.tool_call_format = chomp(templates.get("tool_call_format"));
  return c;
}

namespace {

void check_config(const PromptConfig& config) {
  if (config.objectives.empty()) throw ValidationError("prompt needs at least one objective");
  for (const auto& o : config.objectives) {
    if (!parse_issue_label(to_string(o.label)))
      throw ValidationError(
          fmt::format("objective label '{}' is not an issue label", to_string(o.label)));
  }
}

std::string objectives_text(const PromptConfig& config, const TemplateSet& templates) {
  std::vector<std::string> lines;
  for (const auto& o : config.objectives)
    lines.push_back(fmt::format("- {}: {}", to_string(o.label), o.description));
  return chomp(templates.render("task_objective", {{"objectives", fmt::format("{}", fmt::join(lines, "\n"))}}));
}

std::string labels_text(const PromptConfig& config) {
  std::vector<std::string> labels;
  for (const auto& o : config.objectives) labels.push_back(fmt::format("\"{}\"", to_string(o.label)));
  return fmt::format("{}", fmt::join(labels, ", "));
}

std::string procedure_text(const PromptConfig& config, const TemplateSet& templates,
                           bool with_tools) {
  std::vector<std::string> blocks{chomp(templates.get("procedure_header"))};
  if (has_grounding_step(config.variant))
    blocks.push_back(procedure_block("step_grounding", config, templates));
  if (has_question_step(config.variant))
    blocks.push_back(procedure_block("step_question_generation", config, templates));
  if (with_tools) {
    blocks.push_back(procedure_block("step_tool_calls", config, templates));
    blocks.push_back(procedure_block("step_iterate", config, templates));
  }
  blocks.push_back(procedure_block("step_decision", config, templates));
  return fmt::format("{}", fmt::join(blocks, "\n\n"));
}

}  // namespace

std::string procedure_block(std::string_view step, const PromptConfig& config,
                            const TemplateSet& templates) {
  return chomp(templates.render(step, {{"labels", labels_text(config)}}));
}

std::string build_system_prompt(const PromptConfig& config, std::string_view tool_block,
                                const TemplateSet& templates) {
  check_config(config);
  if (config.tool_call_format.find(kToolCallGrammar) == std::string::npos)
    throw ValidationError("tool call format must contain the call_tool grammar line");
  const std::vector<std::string> sections = {
      objectives_text(config, templates),
      procedure_text(config, templates, true),
      chomp(templates.render("tools_header", {{"tools", chomp(std::string(tool_block))}})),
      config.constraints + "\n" + chomp(templates.get("tool_rules")),
      config.tool_call_format,
  };
  return fmt::format("{}\n", fmt::join(sections, "\n\n"));
}

std::string build_user_message(std::string_view query, std::span<const std::string> objects,
                               const TemplateSet& templates) {
  if (text::trim(query).empty()) throw ValidationError("query must not be empty");
  const std::string listing =
      objects.empty() ? std::string("no objects detected") : text::py_list(objects);
  return chomp(
      templates.render("user_message", {{"query", std::string(query)}, {"objects", listing}}));
}

std::string build_visualobs_prompt(const PromptConfig& config, std::string_view scene_description,
                                   const TemplateSet& templates) {
  check_config(config);
  if (text::trim(scene_description).empty())
    throw ValidationError("scene description must not be empty");
  const std::vector<std::string> sections = {
      objectives_text(config, templates),
      procedure_text(config, templates, false),
      chomp(templates.render("visualobs_observation",
                             {{"description", chomp(std::string(scene_description))}})),
      config.constraints,
  };
  return fmt::format("{}\n", fmt::join(sections, "\n\n"));
}

}  // namespace raider
