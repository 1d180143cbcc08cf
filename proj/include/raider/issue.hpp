#pragma once

#include <optional>
#include <string_view>

namespace raider {

/// Result of a detection run. The first three are the issue vocabulary the
/// model may answer with; the rest describe runs that ended without one.
enum class OutcomeLabel {
  Ambiguity,
  Unfeasibility,
  NoIssue,
  Timeout,           // wall-clock deadline elapsed
  NoFinalResponse,   // iteration cap, or a single-shot baseline answered in prose
  TransportFailure,  // the chat backend failed
  NotSupported,      // a baseline cannot handle the query
};

inline constexpr OutcomeLabel kIssueLabels[] = {OutcomeLabel::Ambiguity,
                                                OutcomeLabel::Unfeasibility,
                                                OutcomeLabel::NoIssue};

std::string_view to_string(OutcomeLabel label);
/// Inverse of to_string over all labels.
std::optional<OutcomeLabel> outcome_label_from_string(std::string_view s);

/// Normalizes a model-supplied issue label ("No Issue", "no_issue", "none",
/// "Unfeasible", ...). Anything outside the three issue labels is rejected.
std::optional<OutcomeLabel> parse_issue_label(std::string_view s);

}  // namespace raider
