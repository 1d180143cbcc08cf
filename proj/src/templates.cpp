#include "raider/templates.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "raider/error.hpp"
#include "raider/issue.hpp"
#include "raider/text.hpp"

namespace raider {

namespace detail {
const std::map<std::string, std::string>& embedded_templates();
}

std::string chomp(std::string s) {
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

const TemplateSet& TemplateSet::defaults() {
  static const TemplateSet set = [] {
    TemplateSet s;
    for (const auto& [name, body] : detail::embedded_templates()) s.templates_[name] = body;
    return s;
  }();
  return set;
}

TemplateSet TemplateSet::with_overrides(const std::filesystem::path& directory) {
  TemplateSet s = defaults();
  if (!std::filesystem::is_directory(directory))
    throw NotFoundError(fmt::format("template directory '{}' not found", directory.string()));
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::stringstream buffer;
    buffer << in.rdbuf();
    s.templates_[entry.path().stem().string()] = buffer.str();
  }
  return s;
}

bool TemplateSet::has(std::string_view name) const { return templates_.find(name) != templates_.end(); }

const std::string& TemplateSet::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw NotFoundError(fmt::format("no template named '{}'", name));
  return it->second;
}

std::string TemplateSet::render(std::string_view name,
                                const std::map<std::string, std::string>& values) const {
  const std::string& body = get(name);
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto open = body.find("{{", pos);
    if (open == std::string::npos) {
      out.append(body, pos, std::string::npos);
      break;
    }
    const auto close = body.find("}}", open + 2);
    if (close == std::string::npos) {
      out.append(body, pos, std::string::npos);
      break;
    }
    out.append(body, pos, open - pos);
    const std::string key = body.substr(open + 2, close - open - 2);
    auto it = values.find(key);
    if (it == values.end())
      throw ValidationError(fmt::format("template '{}' needs a value for '{}'", name, key));
    out += it->second;
    pos = close + 2;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(OutcomeLabel label) {
  switch (label) {
    case OutcomeLabel::Ambiguity: return "ambiguity";
    case OutcomeLabel::Unfeasibility: return "unfeasibility";
    case OutcomeLabel::NoIssue: return "no_issue";
    case OutcomeLabel::Timeout: return "timeout";
    case OutcomeLabel::NoFinalResponse: return "no_final_response";
    case OutcomeLabel::TransportFailure: return "transport_failure";
    case OutcomeLabel::NotSupported: return "not_supported";
  }
  return "?";
}

std::optional<OutcomeLabel> outcome_label_from_string(std::string_view s) {
  for (auto l : {OutcomeLabel::Ambiguity, OutcomeLabel::Unfeasibility, OutcomeLabel::NoIssue,
                 OutcomeLabel::Timeout, OutcomeLabel::NoFinalResponse,
                 OutcomeLabel::TransportFailure, OutcomeLabel::NotSupported}) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

std::optional<OutcomeLabel> parse_issue_label(std::string_view s) {
  const std::string folded = text::fold_name(s);
  if (folded == "ambiguity" || folded == "ambiguous") return OutcomeLabel::Ambiguity;
  if (folded == "unfeasibility" || folded == "unfeasible" || folded == "infeasibility" ||
      folded == "infeasible")
    return OutcomeLabel::Unfeasibility;
  if (folded == "no issue" || folded == "none" || folded == "noissue" || folded == "no issues")
    return OutcomeLabel::NoIssue;
  return std::nullopt;
}

}  // namespace raider
