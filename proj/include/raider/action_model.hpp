#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "raider/issue.hpp"
#include "raider/scene.hpp"

namespace raider {

/// A structured action such as `pick(apple, counter)`.
struct ActionQuery {
  std::string name;
  std::vector<std::string> args;

  /// `name(arg, ...)`; quotes around arguments are dropped. nullopt when the
  /// text is not a single call.
  static std::optional<ActionQuery> parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const ActionQuery&, const ActionQuery&) = default;
};

/// One predicate of an action model, e.g. `robot_holding none`.
struct PreconditionCheck {
  std::string predicate;
  std::string argument;
  bool passed = false;
  /// Natural-language sentence for the evaluated outcome.
  std::string sentence;

  std::string rendered() const { return predicate + " " + argument; }
};

struct PreconditionReport {
  bool supported = false;
  std::string unsupported_reason;
  std::vector<PreconditionCheck> checks;

  /// Evaluation stops at the first failing check, so this is the last one.
  const PreconditionCheck* first_failure() const;
  bool satisfied() const { return supported && first_failure() == nullptr; }
};

/// Actions with a fixed precondition model: pick, place, open, close,
/// turnon, turnoff, slice.
bool has_action_model(std::string_view action);

/// Evaluates the nested checks for the action in order, stopping at the
/// first failure. Arguments must be object ids.
PreconditionReport check_preconditions(const ActionQuery& query, const Scene& scene);

struct ModelVerdict {
  OutcomeLabel label;
  std::string explanation;
};

/// Failure -> unfeasibility citing the failed check; success -> no_issue
/// listing the passed checks; unknown action or arity -> not_supported.
/// Never returns ambiguity.
ModelVerdict judge_action(const ActionQuery& query, const Scene& scene);

/// Scene changes produced by a successful action. Callers check
/// preconditions first.
std::vector<SceneMutation> action_effects(const ActionQuery& query, const Scene& scene);

}  // namespace raider
