#include "raider/tools.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "raider/error.hpp"
#include "raider/text.hpp"

namespace raider {

std::string ToolSpec::signature() const {
  return fmt::format("{}({})", name, fmt::join(arg_names, ", "));
}

bool ToolsetProfile::contains(std::string_view tool) const {
  return std::find(members.begin(), members.end(), tool) != members.end();
}

std::string ToolResult::message() const {
  if (success)
    return fmt::format("Call to tool {} with args {} returned {}", tool, text::py_list(raw_args),
                       value);
  return fmt::format("Call to tool {} with args {} failed: {}", tool, text::py_list(raw_args),
                     value);
}

// ---------------------------------------------------------------------------
// Argument resolution

namespace {

struct Candidate {
  std::string id;
  std::vector<std::string> names;
};

std::optional<std::string> resolve_among(std::string_view raw,
                                         const std::vector<Candidate>& candidates,
                                         double threshold) {
  for (const auto& c : candidates) {
    if (c.id == raw) return c.id;
  }
  const std::string folded = text::fold_name(raw);
  std::optional<std::string> best;
  double best_score = -1.0;
  for (const auto& c : candidates) {
    double score = 0.0;
    for (const auto& name : c.names)
      score = std::max(score, text::edit_similarity(folded, text::fold_name(name)));
    if (score > best_score || (score == best_score && best && c.id < *best)) {
      best_score = score;
      best = c.id;
    }
  }
  if (best && best_score >= threshold) return best;
  return std::nullopt;
}

}  // namespace

std::optional<std::string> resolve_argument(std::string_view raw, const Scene& scene,
                                            double threshold) {
  std::vector<Candidate> candidates;
  for (const auto& o : scene.objects()) {
    if (!o.detectable) continue;
    Candidate c{o.id, {o.id, o.display_name}};
    c.names.insert(c.names.end(), o.aliases.begin(), o.aliases.end());
    candidates.push_back(std::move(c));
  }
  return resolve_among(raw, candidates, threshold);
}

std::optional<std::string> resolve_human(std::string_view raw, const Scene& scene,
                                         double threshold) {
  std::vector<Candidate> candidates;
  for (const auto& h : scene.humans()) {
    if (h.recognized) candidates.push_back({h.name, {h.name}});
  }
  return resolve_among(raw, candidates, threshold);
}

// ---------------------------------------------------------------------------
// User information

const std::vector<std::string>& default_user_corpus() {
  static const std::vector<std::string> kCorpus = {
      "The user loves apples.",
      "The user's most eaten vegetable is the tomato.",
      "The user's favorite beverage is coke.",
      "The user prefers potato chips as their snack.",
      "The user's preferred book is 'Don Quixote.'",
      "The user's most used cooking spice is oregano.",
      "The user used a frying pan to cook their last meal.",
      "The user was reading '1984' last night.",
      "The appliance the user used for their last recipe was the fourth stoveburner.",
      "The most used stoveburner is the second one.",
      "The user left the living room light on.",
      "The most used light is the living room light.",
      "The user enjoyed grapes at their last gathering.",
      "The user bought a cutting board yesterday.",
  };
  return kCorpus;
}

std::string retrieve_user_information(std::string_view query,
                                      std::span<const std::string> corpus,
                                      const SimilarityScorer& scorer) {
  if (corpus.empty()) throw ValidationError("user information corpus is empty");
  const SimilarityScorer& score =
      scorer ? scorer : SimilarityScorer([](std::string_view a, std::string_view b) {
        return text::token_cosine(a, b);
      });
  std::size_t best = 0;
  double best_score = score(query, corpus[0]);
  for (std::size_t i = 1; i < corpus.size(); ++i) {
    const double s = score(query, corpus[i]);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return corpus[best];
}

// ---------------------------------------------------------------------------
// Registry

namespace {

std::string py_flag_dict(const std::map<std::string, bool>& flags) {
  std::string out = "{";
  bool first = true;
  for (const auto& [label, value] : flags) {
    if (!first) out += ", ";
    first = false;
    out += text::py_repr(label) + ": " + text::py_bool(value);
  }
  return out + "}";
}

const std::vector<std::string> kHousehold = {
    "object_detection",      "get_object_state",  "get_object_properties",
    "get_spatial_relations", "dist_robot_to_obj", "dist_between_objs",
    "robot_holding",         "check_free_path",
};
const std::vector<std::string> kHumanTools = {
    "recognize_humans", "detect_human_gaze", "human_hands_free", "dist_robot_to_human"};

}  // namespace

void ToolRegistry::add(ToolSpec spec, Handler handler) {
  if (handlers_.count(spec.name))
    throw ValidationError(fmt::format("tool '{}' registered twice", spec.name), spec.name);
  if (spec.arg_kinds.size() != spec.arg_names.size())
    throw ValidationError(fmt::format("tool '{}' has mismatched argument kinds", spec.name));
  handlers_.emplace(spec.name, std::move(handler));
  specs_.push_back(std::move(spec));
}

ToolRegistry ToolRegistry::standard(RegistryOptions options) {
  ToolRegistry reg;
  reg.options_ = std::move(options);

  using A = ArgKind;
  using Args = std::span<const std::string>;

  reg.add({"object_detection", {}, {}, "Detects the objects present in the scene.",
           "list of detected object names", {}},
          [](const Scene& s, Args) { return text::py_list(s.detectable_ids()); });

  reg.add({"get_object_state", {"object"}, {A::Object},
           "Returns the current states of an object, such as open, on, sliced or clean.",
           "dictionary mapping each state to True or False", {}},
          [](const Scene& s, Args a) { return py_flag_dict(s.object(a[0]).states); });

  reg.add({"get_object_properties", {"object"}, {A::Object},
           "Returns the properties of an object, such as openable, toggleable, sliceable or "
           "pickable.",
           "dictionary mapping each property to True or False", {}},
          [](const Scene& s, Args a) { return py_flag_dict(s.object(a[0]).properties); });

  reg.add({"get_spatial_relations", {"object"}, {A::Object},
           "Returns how an object is placed relative to the other detected objects: inside, on "
           "top of, to the left of, to the right of, above, below, occluding or near.",
           "list of relations such as 'on top of table'", {}},
          [](const Scene& s, Args a) {
            std::vector<std::string> phrases;
            for (const auto& r : compute_relations(s)) {
              if (r.subject != a[0]) continue;
              const auto* other = s.find(r.object);
              if (other && other->detectable)
                phrases.push_back(fmt::format("{} {}", to_phrase(r.relation), r.object));
            }
            return text::py_list(phrases);
          });

  reg.add({"dist_robot_to_obj", {"object"}, {A::Object},
           "Returns the distance from the robot to an object.", "distance in meters", {}},
          [](const Scene& s, Args a) { return text::format_length(distance_robot_to(s, a[0])); });

  reg.add({"dist_between_objs", {"object1", "object2"}, {A::Object, A::Object},
           "Returns the distance between two objects.", "distance in meters", {}},
          [](const Scene& s, Args a) {
            return text::format_length(distance_between(s, a[0], a[1]));
          });

  reg.add({"robot_holding", {}, {}, "Returns the object currently held by the robot.",
           "object name, or None when the gripper is empty", {}},
          [](const Scene& s, Args) {
            return s.robot().holding ? *s.robot().holding : std::string("None");
          });

  reg.add({"check_free_path", {"target"}, {A::Target},
           "Checks whether the way from the robot to a target object or person is free of "
           "obstacles.",
           "True if the path is free, False otherwise", {}},
          [](const Scene& s, Args a) { return text::py_bool(check_free_path(s, a[0])); });

  reg.add({"recognize_humans", {}, {}, "Identifies the people present in the scene.",
           "list of names, with '-1' for a person who is present but not recognized", {}},
          [](const Scene& s, Args) {
            std::vector<std::string> names;
            for (const auto& h : s.humans()) names.push_back(h.reported_name());
            return text::py_list(names);
          });

  reg.add({"detect_human_gaze", {"person"}, {A::Human},
           "Checks whether a person is looking at the robot.",
           "True if the person looks at the robot, False otherwise", {}},
          [](const Scene& s, Args a) { return text::py_bool(s.find_human(a[0])->gaze_at_robot); });

  reg.add({"human_hands_free", {"person"}, {A::Human},
           "Checks whether a person has their hands free.",
           "True if both hands are free, False otherwise", {}},
          [](const Scene& s, Args a) { return text::py_bool(s.find_human(a[0])->hands_free); });

  reg.add({"dist_robot_to_human", {"person"}, {A::Human},
           "Returns the distance from the robot to a person.",
           "distance in meters followed by the unit, e.g. 1.2m", {}},
          [](const Scene& s, Args a) {
            return text::format_length(distance_robot_to_human(s, a[0])) + "m";
          });

  reg.add({"retrieve_user_information", {"query"}, {A::Text},
           "Retrieves the stored statement about the user's preferences or activity history "
           "that best matches a query.",
           "one statement about the user", {}},
          [corpus = reg.options_.user_corpus, scorer = reg.options_.user_info_scorer](
              const Scene&, Args a) { return retrieve_user_information(a[0], corpus, scorer); });

  std::vector<std::string> assistive = kHousehold;
  assistive.insert(assistive.end(), kHumanTools.begin(), kHumanTools.end());
  std::vector<std::string> user_prefs = kHousehold;
  user_prefs.push_back("retrieve_user_information");

  std::vector<ToolsetProfile> profiles = {
      {"household", kHousehold}, {"assistive", assistive}, {"user_prefs", user_prefs}};
  for (auto& p : reg.options_.profiles) {
    std::erase_if(profiles, [&](const ToolsetProfile& q) { return q.label == p.label; });
    profiles.push_back(p);
  }
  for (auto& p : profiles) {
    for (const auto& member : p.members) {
      if (!reg.handlers_.count(member))
        throw ValidationError(
            fmt::format("profile '{}' names unregistered tool '{}'", p.label, member), member);
    }
    for (auto& spec : reg.specs_) {
      if (p.contains(spec.name)) spec.profiles.insert(p.label);
    }
    reg.profiles_.emplace(p.label, std::move(p));
  }
  return reg;
}

const ToolSpec* ToolRegistry::find(std::string_view name) const {
  auto it = std::find_if(specs_.begin(), specs_.end(),
                         [&](const ToolSpec& s) { return s.name == name; });
  return it == specs_.end() ? nullptr : &*it;
}

const ToolsetProfile& ToolRegistry::profile(std::string_view label) const {
  auto it = profiles_.find(label);
  if (it == profiles_.end()) throw NotFoundError(fmt::format("unknown toolset profile '{}'", label));
  return it->second;
}

std::vector<std::string> ToolRegistry::profile_labels() const {
  std::vector<std::string> out;
  for (const auto& [label, _] : profiles_) out.push_back(label);
  return out;
}

ToolResult ToolRegistry::invoke(const ToolCall& call, const Scene& scene) const {
  ToolResult result;
  result.tool = call.tool;
  result.raw_args = call.args;
  auto fail = [&](std::string reason) {
    result.success = false;
    result.value = std::move(reason);
    return result;
  };

  const ToolSpec* spec = find(call.tool);
  if (!spec) return fail(fmt::format("unknown tool '{}'", call.tool));
  if (call.args.size() != spec->arity())
    return fail(fmt::format("{} expects {} argument(s), got {}", spec->signature(),
                            spec->arity(), call.args.size()));

  for (std::size_t i = 0; i < call.args.size(); ++i) {
    const auto& raw = call.args[i];
    std::optional<std::string> resolved;
    switch (spec->arg_kinds[i]) {
      case ArgKind::Object:
        resolved = resolve_argument(raw, scene, options_.fuzzy_threshold);
        if (!resolved) return fail(fmt::format("no object matching '{}'", raw));
        result.grounded_objects.push_back(*resolved);
        break;
      case ArgKind::Human:
        resolved = resolve_human(raw, scene, options_.fuzzy_threshold);
        if (!resolved) return fail(fmt::format("no person matching '{}'", raw));
        break;
      case ArgKind::Target:
        resolved = resolve_argument(raw, scene, options_.fuzzy_threshold);
        if (resolved) {
          result.grounded_objects.push_back(*resolved);
        } else {
          resolved = resolve_human(raw, scene, options_.fuzzy_threshold);
        }
        if (!resolved) return fail(fmt::format("no object or person matching '{}'", raw));
        break;
      case ArgKind::Text:
        resolved = raw;
        break;
    }
    result.resolved_args.push_back(*resolved);
  }

  try {
    result.value = handlers_.find(spec->name)->second(scene, result.resolved_args);
    result.success = true;
  } catch (const std::exception& e) {
    result.grounded_objects.clear();
    return fail(e.what());
  }
  return result;
}

std::string render_tool_descriptions(const ToolRegistry& registry,
                                     const ToolsetProfile& profile) {
  std::string out;
  for (const auto& name : profile.members) {
    const ToolSpec* spec = registry.find(name);
    if (!spec) continue;
    out += fmt::format("- {}: {} Output: {}.\n", spec->signature(), spec->description,
                       spec->output_description);
  }
  return out;
}

}  // namespace raider
