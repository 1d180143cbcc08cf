#include "raider/action_model.hpp"

#include <fmt/format.h>

#include <cctype>

#include "raider/text.hpp"

namespace raider {

std::optional<ActionQuery> ActionQuery::parse(std::string_view text) {
  const std::string s = text::trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos || open == 0 || s.back() != ')') return std::nullopt;
  ActionQuery q;
  q.name = text::trim(std::string_view(s).substr(0, open));
  for (char c : q.name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return std::nullopt;
  }
  const std::string_view inner = std::string_view(s).substr(open + 1, s.size() - open - 2);
  if (inner.find_first_of("()") != std::string_view::npos) return std::nullopt;
  if (!text::trim(inner).empty()) {
    std::size_t pos = 0;
    while (pos <= inner.size()) {
      const auto comma = inner.find(',', pos);
      std::string arg = text::trim(inner.substr(pos, comma == std::string_view::npos
                                                         ? std::string_view::npos
                                                         : comma - pos));
      if (arg.size() >= 2 && (arg.front() == '"' || arg.front() == '\'') &&
          arg.back() == arg.front())
        arg = arg.substr(1, arg.size() - 2);
      if (arg.empty()) return std::nullopt;
      q.args.push_back(std::move(arg));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  return q;
}

std::string ActionQuery::to_string() const {
  return fmt::format("{}({})", name, fmt::join(args, ", "));
}

const PreconditionCheck* PreconditionReport::first_failure() const {
  for (const auto& c : checks) {
    if (!c.passed) return &c;
  }
  return nullptr;
}

namespace {

struct ArityRange {
  std::string_view name;
  std::size_t min;
  std::size_t max;
};

constexpr ArityRange kModels[] = {
    {"pick", 1, 2},    {"place", 2, 2},   {"open", 1, 1},  {"close", 1, 1},
    {"turnon", 1, 1},  {"turnoff", 1, 1}, {"slice", 1, 1},
};

const ArityRange* model_for(std::string_view name) {
  for (const auto& m : kModels) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

// Appends checks until one fails.
class Evaluator {
 public:
  explicit Evaluator(const Scene& scene, PreconditionReport& report)
      : scene_(scene), report_(report) {}

  bool failed() const { return failed_; }

  void present(const std::string& id) {
    const auto* o = scene_.find(id);
    const bool ok = o != nullptr && o->detectable;
    add("is_present", id, ok,
        ok ? fmt::format("{} is present in the scene", id)
           : fmt::format("{} is not present in the scene", id));
  }

  void holding_none() {
    const auto& held = scene_.robot().holding;
    add("robot_holding", "none", !held,
        held ? fmt::format("the robot is already holding {}", *held)
             : std::string("the robot is not holding anything"));
  }

  void holding(const std::string& id) {
    const auto& held = scene_.robot().holding;
    const bool ok = held && *held == id;
    std::string sentence;
    if (ok) {
      sentence = fmt::format("the robot is holding {}", id);
    } else if (held) {
      sentence = fmt::format("the robot is holding {}, not {}", *held, id);
    } else {
      sentence = fmt::format("the robot is not holding {}", id);
    }
    add("robot_holding", id, ok, std::move(sentence));
  }

  void holding_knife() {
    const auto& held = scene_.robot().holding;
    bool ok = false;
    if (held) {
      const auto* o = scene_.find(*held);
      ok = text::contains_ci(*held, "knife") ||
           (o != nullptr && text::contains_ci(o->display_name, "knife"));
    }
    add("robot_holding", "knife", ok,
        ok ? fmt::format("the robot is holding a knife ({})", *held)
           : std::string("the robot is not holding a knife"));
  }

  void property(std::string_view predicate, std::string_view label, const std::string& id,
                std::string_view yes, std::string_view no) {
    const auto* o = scene_.find(id);
    const bool ok = o != nullptr && o->property(label);
    add(predicate, id, ok, fmt::format("{} {}", id, ok ? yes : no));
  }

  void state(std::string_view predicate, std::string_view label, bool expected,
             const std::string& id, std::string_view yes, std::string_view no) {
    const auto* o = scene_.find(id);
    const bool ok = o != nullptr && o->state(label) == expected;
    add(predicate, id, ok, fmt::format("{} {}", id, ok ? yes : no));
  }

  // if is_openable location: is_open location
  void open_if_openable(const std::string& location) {
    const auto* o = scene_.find(location);
    if (o == nullptr || !o->property("openable")) return;
    state("is_open", "open", true, location, "is open", "is closed");
  }

 private:
  void add(std::string_view predicate, std::string_view argument, bool ok, std::string sentence) {
    if (failed_) return;
    report_.checks.push_back({std::string(predicate), std::string(argument), ok,
                              std::move(sentence)});
    failed_ = !ok;
  }

  const Scene& scene_;
  PreconditionReport& report_;
  bool failed_ = false;
};

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

}  // namespace

bool has_action_model(std::string_view action) { return model_for(action) != nullptr; }

PreconditionReport check_preconditions(const ActionQuery& query, const Scene& scene) {
  PreconditionReport report;
  const auto* model = model_for(query.name);
  if (model == nullptr) {
    report.unsupported_reason = fmt::format("no action model for '{}'", query.name);
    return report;
  }
  if (query.args.size() < model->min || query.args.size() > model->max) {
    report.unsupported_reason =
        fmt::format("'{}' takes {} to {} arguments", query.name, model->min, model->max);
    return report;
  }
  report.supported = true;
  Evaluator ev(scene, report);
  const std::string& target = query.args[0];
  const std::string_view a = query.name;
  if (a == "pick") {
    ev.present(target);
    ev.holding_none();
    if (query.args.size() == 2) ev.open_if_openable(query.args[1]);
  } else if (a == "place") {
    ev.present(target);
    ev.holding(target);
    ev.open_if_openable(query.args[1]);
  } else if (a == "open" || a == "close") {
    const bool opening = a == "open";
    ev.present(target);
    ev.holding_none();
    ev.property("is_openable", "openable", target, "can be opened", "cannot be opened");
    if (opening) {
      ev.state("is_closed", "open", false, target, "is closed", "is already open");
    } else {
      ev.state("is_open", "open", true, target, "is open", "is already closed");
    }
  } else if (a == "turnon" || a == "turnoff") {
    const bool on = a == "turnon";
    ev.present(target);
    ev.holding_none();
    ev.property("is_toggeable", "toggleable", target, "can be turned on and off",
                "cannot be turned on or off");
    if (on) {
      ev.state("is_turned_off", "on", false, target, "is turned off", "is already turned on");
    } else {
      ev.state("is_turned_on", "on", true, target, "is turned on", "is already turned off");
    }
  } else if (a == "slice") {
    ev.present(target);
    ev.holding_knife();
    ev.property("is_sliceable", "sliceable", target, "can be sliced", "cannot be sliced");
    ev.state("not_sliced", "sliced", false, target, "is not sliced yet", "is already sliced");
  }
  return report;
}

ModelVerdict judge_action(const ActionQuery& query, const Scene& scene) {
  const auto report = check_preconditions(query, scene);
  if (!report.supported) return {OutcomeLabel::NotSupported, report.unsupported_reason};
  if (const auto* failure = report.first_failure()) {
    return {OutcomeLabel::Unfeasibility,
            fmt::format("{}, so {} cannot be executed (failed check: {}).",
                        capitalize(failure->sentence), query.to_string(), failure->rendered())};
  }
  std::vector<std::string> sentences;
  for (const auto& c : report.checks) sentences.push_back(c.sentence);
  return {OutcomeLabel::NoIssue,
          fmt::format("All preconditions hold: {}.", fmt::join(sentences, "; "))};
}

std::vector<SceneMutation> action_effects(const ActionQuery& query, const Scene& scene) {
  const std::string_view a = query.name;
  if (query.args.empty()) return {};
  const std::string& target = query.args[0];
  if (a == "pick") return {mutation::SetRobotHolding{target}};
  if (a == "place" && query.args.size() == 2) {
    const auto& obj = scene.object(target).box;
    const auto& loc = scene.object(query.args[1]).box;
    const Vec3 c = loc.center;
    return {mutation::SetRobotHolding{std::nullopt},
            mutation::MoveObject{target, {c.x, c.y, loc.top() + obj.half_extents.z}}};
  }
  if (a == "open") return {mutation::SetState{target, "open", true}};
  if (a == "close") return {mutation::SetState{target, "open", false}};
  if (a == "turnon") return {mutation::SetState{target, "on", true}};
  if (a == "turnoff") return {mutation::SetState{target, "on", false}};
  if (a == "slice") return {mutation::SetState{target, "sliced", true}};
  return {};
}

}  // namespace raider
