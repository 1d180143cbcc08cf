#include "raider/pfm.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <set>

#include "raider/error.hpp"
#include "raider/text.hpp"

namespace raider {

// ---------------------------------------------------------------------------
// Brace matching shared by both parsers

namespace {

// Index one past the brace closing the one at `open`, honoring quoted
// strings; npos when unbalanced.
std::size_t match_brace(std::string_view text, std::size_t open) {
  int depth = 0;
  char quote = 0;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (quote) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      // An apostrophe inside a bare word ("robot's") is not a quote.
      if (c == '\'' && i > open && std::isalnum(static_cast<unsigned char>(text[i - 1])))
        continue;
      quote = c;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

// Recursive-descent reader for a call_tool body.
class BodyParser {
 public:
  explicit BodyParser(std::string_view body) : s_(body) {}

  void parse(ToolCall& call) {
    std::set<std::string> seen;
    bool have_args = false;
    skip_ws();
    while (pos_ < s_.size()) {
      const std::string key = read_key();
      skip_ws();
      expect(':');
      if (!seen.insert(key).second) fail(fmt::format("duplicate key '{}'", key));
      skip_ws();
      if (key == "tool") {
        call.tool = read_scalar();
        if (call.tool.empty()) fail("empty tool name");
      } else if (key == "args") {
        call.args = read_list();
        have_args = true;
      } else {
        fail(fmt::format("unexpected key '{}'", key));
      }
      skip_ws();
      if (pos_ < s_.size()) {
        expect(',');
        skip_ws();
      }
    }
    if (!seen.count("tool")) fail("missing 'tool'");
    if (!have_args) fail("missing 'args'");
  }

 private:
  [[noreturn]] void fail(const std::string& why) const { throw std::invalid_argument(why); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void expect(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c)
      fail(fmt::format("expected '{}' at offset {}", c, pos_));
    ++pos_;
  }

  static bool bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  }

  std::string read_quoted() {
    const char quote = s_[pos_++];
    std::string out;
    while (pos_ < s_.size()) {
      const char c = s_[pos_++];
      if (c == '\\' && pos_ < s_.size()) {
        out += s_[pos_++];
      } else if (c == quote) {
        return out;
      } else {
        out += c;
      }
    }
    fail("unterminated string");
  }

  std::string read_bare() {
    const auto start = pos_;
    while (pos_ < s_.size() && bare_char(s_[pos_])) ++pos_;
    if (pos_ == start) fail(fmt::format("unexpected character at offset {}", pos_));
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string read_key() {
    if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '\'')) return read_quoted();
    return read_bare();
  }

  std::string read_scalar() {
    if (pos_ >= s_.size()) fail("missing value");
    if (s_[pos_] == '"' || s_[pos_] == '\'') return read_quoted();
    return read_bare();
  }

  std::vector<std::string> read_list() {
    if (pos_ >= s_.size() || s_[pos_] != '[') fail("'args' must be a list");
    ++pos_;
    std::vector<std::string> items;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return items;
    }
    while (true) {
      skip_ws();
      if (pos_ >= s_.size()) fail("unterminated argument list");
      const char c = s_[pos_];
      if (c == '"' || c == '\'') {
        items.push_back(read_quoted());
      } else if (c == '[' || c == '{' || c == ',' || c == ']') {
        fail(fmt::format("unexpected '{}' in argument list", c));
      } else {
        // Bare argument: anything up to the next separator, inner spaces kept.
        const auto start = pos_;
        while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '[' &&
               s_[pos_] != '{' && s_[pos_] != '}' && s_[pos_] != '"' && s_[pos_] != '\'')
          ++pos_;
        std::string token = text::trim(s_.substr(start, pos_ - start));
        if (token.empty()) fail("empty argument");
        items.push_back(std::move(token));
      }
      skip_ws();
      if (pos_ >= s_.size()) fail("unterminated argument list");
      if (s_[pos_] == ']') {
        ++pos_;
        return items;
      }
      expect(',');
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<ToolCall> parse_tool_calls(std::string_view text) {
  static constexpr std::string_view kPrefix = "call_tool";
  std::vector<ToolCall> calls;
  std::size_t pos = 0;
  while ((pos = text.find(kPrefix, pos)) != std::string_view::npos) {
    const std::size_t start = pos;
    std::size_t open = pos + kPrefix.size();
    while (open < text.size() && (text[open] == ' ' || text[open] == '\t')) ++open;
    if (open >= text.size() || text[open] != '{') {
      pos = start + kPrefix.size();
      continue;
    }
    ToolCall call;
    call.begin = start;
    const std::size_t close = match_brace(text, open);
    if (close == std::string_view::npos) {
      call.end = text.size();
      call.source = std::string(text.substr(start));
      call.malformed = true;
      call.error = "unbalanced braces in tool call";
      calls.push_back(std::move(call));
      pos = open + 1;
      continue;
    }
    call.end = close;
    call.source = std::string(text.substr(start, close - start));
    try {
      BodyParser(text.substr(open + 1, close - open - 2)).parse(call);
    } catch (const std::invalid_argument& e) {
      call.malformed = true;
      call.error = e.what();
    }
    calls.push_back(std::move(call));
    pos = close;
  }
  return calls;
}

std::optional<FinalResponse> parse_final_response(std::string_view text) {
  for (std::size_t open = text.find('{'); open != std::string_view::npos;
       open = text.find('{', open + 1)) {
    const std::size_t close = match_brace(text, open);
    if (close == std::string_view::npos) continue;
    const auto candidate = text.substr(open, close - open);
    if (candidate.find("final_response") == std::string_view::npos) continue;
    const Json j = Json::parse(candidate.begin(), candidate.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    auto it = j.find("final_response");
    if (it == j.end() || !it->is_string()) continue;
    const auto label = parse_issue_label(it->get<std::string>());
    if (!label) continue;
    FinalResponse out{*label, {}};
    if (auto e = j.find("explanation"); e != j.end() && e->is_string())
      out.explanation = e->get<std::string>();
    return out;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Warnings

std::string_view kind_phrase(WarningKind kind) {
  switch (kind) {
    case WarningKind::MadeUpToolResponse: return "Made up Tool Response";
    case WarningKind::MadeUpToolName: return "Made up Tool Name";
    case WarningKind::UnsuccessfulToolCall: return "Unsuccessful Tool Call";
    case WarningKind::MissingToolCallOrFinalResponse: return "Missing Tool Call or Final Response";
  }
  return "?";
}

std::string_view kind_key(WarningKind kind) {
  switch (kind) {
    case WarningKind::MadeUpToolResponse: return "made_up_tool_response";
    case WarningKind::MadeUpToolName: return "made_up_tool_name";
    case WarningKind::UnsuccessfulToolCall: return "unsuccessful_tool_call";
    case WarningKind::MissingToolCallOrFinalResponse: return "missing_tool_call_or_final_response";
  }
  return "?";
}

int warning_number(WarningKind kind) { return static_cast<int>(kind) + 1; }

namespace {

std::string warning_head(WarningKind kind) {
  return fmt::format("Warning {} - {}:", warning_number(kind), kind_phrase(kind));
}

}  // namespace

Warning made_up_tool_response() {
  const auto k = WarningKind::MadeUpToolResponse;
  return {k, warning_head(k) + " a final response was given while tool calls were still pending. "
                               "Tool results cannot be known before the tools run; wait for "
                               "the tool responses before giving the final response."};
}

Warning made_up_tool_name(const ToolCall& call) {
  const auto k = WarningKind::MadeUpToolName;
  return {k, fmt::format("{} the tool '{}' is not in the list of available tools. Only call "
                         "tools from the tool description.",
                         warning_head(k), call.tool)};
}

Warning unsuccessful_tool_call(const ToolCall& call, std::string_view reason) {
  const auto k = WarningKind::UnsuccessfulToolCall;
  return {k, fmt::format("{} the call {} failed: {}. Check the tool name, its arguments and the "
                         "call format.",
                         warning_head(k), call.source, reason)};
}

Warning missing_tool_call_or_final_response() {
  const auto k = WarningKind::MissingToolCallOrFinalResponse;
  return {k, warning_head(k) + " the response contains neither a tool call nor a final response. "
                               "Continue with tool calls in the call_tool format, or give the "
                               "final response."};
}

std::optional<WarningKind> warning_kind_of(const ChatMessage& message) {
  if (message.role != Role::User) return std::nullopt;
  for (auto k : kAllWarnings) {
    if (message.content.rfind(warning_head(k), 0) == 0) return k;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Outcome

int RunStats::warning_count(WarningKind kind) const {
  auto it = warnings.find(kind);
  return it == warnings.end() ? 0 : it->second;
}

int RunStats::total_warnings() const {
  int n = 0;
  for (const auto& [_, c] : warnings) n += c;
  return n;
}

Json AgentOutcome::to_json() const {
  Json warnings = Json::object();
  for (auto k : kAllWarnings) warnings[std::string(kind_key(k))] = stats.warning_count(k);
  Json log_json = Json::array();
  for (const auto& m : log) log_json.push_back(raider::to_json(m));
  Json j = {{"label", to_string(label)},
            {"explanation", explanation},
            {"stats",
             {{"iterations", stats.iterations},
              {"tool_calls", stats.tool_calls},
              {"warnings", warnings},
              {"elapsed_seconds", stats.elapsed_seconds}}},
            {"grounding", grounding},
            {"log", log_json}};
  if (!error.empty()) j["error"] = error;
  return j;
}

// ---------------------------------------------------------------------------
// Flow manager

ProgramFlowManager::ProgramFlowManager(ChatBackend& backend, const ToolRegistry& registry,
                                       RunConfig config, const TemplateSet& templates)
    : backend_(backend),
      registry_(registry),
      config_(std::move(config)),
      templates_(templates),
      profile_(registry.profile(config_.profile)) {
  PromptConfig prompt = config_.prompt ? *config_.prompt
                                       : PromptConfig::defaults(config_.profile, templates_);
  prompt.variant = config_.variant;
  system_prompt_ =
      build_system_prompt(prompt, render_tool_descriptions(registry_, profile_), templates_);
}

AgentOutcome ProgramFlowManager::run(std::string_view query, Scene& scene,
                                     RunObserver* observer) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  auto elapsed = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
  };

  AgentOutcome outcome;
  auto append = [&](ChatMessage m, MessageKind kind,
                    std::optional<WarningKind> warning = std::nullopt) {
    outcome.log.push_back(std::move(m));
    if (warning) ++outcome.stats.warnings[*warning];
    if (observer) observer->on_message(outcome.log.back(), kind, warning);
  };
  auto warn = [&](const Warning& w) {
    append({Role::User, w.message}, MessageKind::Warning, w.kind);
  };
  auto finish = [&](OutcomeLabel label) {
    outcome.label = label;
    outcome.stats.elapsed_seconds =
        std::chrono::duration<double>(Clock::now() - started).count();
    if (observer) observer->on_outcome(outcome);
    return outcome;
  };

  append({Role::System, system_prompt_}, MessageKind::SystemPrompt);
  append({Role::User, build_user_message(query, scene.detectable_ids(), templates_)},
         MessageKind::Query);

  std::set<std::string> grounded;
  for (int iteration = 0; iteration < config_.max_iterations; ++iteration) {
    if (observer) observer->between_iterations(scene);
    const auto remaining = config_.deadline - elapsed();
    if (remaining <= std::chrono::milliseconds::zero()) return finish(OutcomeLabel::Timeout);

    ChatMessage reply;
    try {
      outcome.stats.iterations = iteration + 1;
      reply = backend_.complete(outcome.log, config_.chat,
                                std::min(remaining, config_.chat.request_timeout));
    } catch (const TimeoutError& e) {
      if (elapsed() >= config_.deadline) return finish(OutcomeLabel::Timeout);
      outcome.error = e.what();
      return finish(OutcomeLabel::TransportFailure);
    } catch (const TransportError& e) {
      outcome.error = e.what();
      return finish(OutcomeLabel::TransportFailure);
    } catch (const ScriptError& e) {
      outcome.error = e.what();
      return finish(OutcomeLabel::TransportFailure);
    }
    append(reply, MessageKind::Assistant);

    const auto calls = parse_tool_calls(reply.content);
    const auto final_response = parse_final_response(reply.content);

    if (calls.empty()) {
      if (final_response) {
        outcome.explanation = final_response->explanation;
        return finish(final_response->label);
      }
      warn(missing_tool_call_or_final_response());
      continue;
    }

    // The final response is discarded; the calls still run.
    if (final_response) warn(made_up_tool_response());
    for (const auto& call : calls) {
      ++outcome.stats.tool_calls;
      if (observer) observer->on_tool_call(call);
      if (call.malformed) {
        warn(unsuccessful_tool_call(call, call.error));
        continue;
      }
      if (!profile_.contains(call.tool)) {
        warn(made_up_tool_name(call));
        continue;
      }
      const ToolResult result = registry_.invoke(call, scene);
      if (!result.success) {
        warn(unsuccessful_tool_call(call, result.value));
        continue;
      }
      for (const auto& id : result.grounded_objects) {
        if (grounded.insert(id).second) outcome.grounding.push_back(id);
      }
      append({Role::User, result.message()}, MessageKind::ToolResult);
    }
  }
  return finish(OutcomeLabel::NoFinalResponse);
}

}  // namespace raider
