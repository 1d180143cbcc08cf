#include "raider/scene.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "raider/error.hpp"
#include "raider/text.hpp"

namespace raider {

bool ObjectInstance::state(std::string_view label) const {
  auto it = states.find(std::string(label));
  return it != states.end() && it->second;
}

bool ObjectInstance::property(std::string_view label) const {
  auto it = properties.find(std::string(label));
  return it != properties.end() && it->second;
}

bool ObjectInstance::has_state(std::string_view label) const {
  return states.count(std::string(label)) > 0;
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::Inside: return "inside";
    case Relation::OnTopOf: return "on_top_of";
    case Relation::LeftOf: return "left_of";
    case Relation::RightOf: return "right_of";
    case Relation::Above: return "above";
    case Relation::Below: return "below";
    case Relation::Occluding: return "occluding";
    case Relation::Near: return "near";
  }
  return "?";
}

std::string_view to_phrase(Relation r) {
  switch (r) {
    case Relation::Inside: return "inside";
    case Relation::OnTopOf: return "on top of";
    case Relation::LeftOf: return "to the left of";
    case Relation::RightOf: return "to the right of";
    case Relation::Above: return "above";
    case Relation::Below: return "below";
    case Relation::Occluding: return "occluding";
    case Relation::Near: return "near";
  }
  return "?";
}

std::optional<Relation> relation_from_string(std::string_view s) {
  for (Relation r : kAllRelations) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON reading with field paths

namespace {

class Reader {
 public:
  Reader(const Json& node, std::string path) : node_(node), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, path_); }

  Reader at(std::string_view key) const {
    if (!node_.is_object()) fail("expected an object");
    auto it = node_.find(std::string(key));
    if (it == node_.end()) fail(fmt::format("missing required field '{}'", key));
    return Reader(*it, child(key));
  }

  std::optional<Reader> maybe(std::string_view key) const {
    if (!node_.is_object()) fail("expected an object");
    auto it = node_.find(std::string(key));
    if (it == node_.end() || it->is_null()) return std::nullopt;
    return Reader(*it, child(key));
  }

  std::vector<Reader> items() const {
    if (!node_.is_array()) fail("expected an array");
    std::vector<Reader> out;
    for (std::size_t i = 0; i < node_.size(); ++i)
      out.emplace_back(node_[i], fmt::format("{}[{}]", path_, i));
    return out;
  }

  std::string str() const {
    if (!node_.is_string()) fail("expected a string");
    return node_.get<std::string>();
  }

  double number() const {
    if (!node_.is_number()) fail("expected a number");
    return node_.get<double>();
  }

  bool boolean() const {
    if (!node_.is_boolean()) fail("expected a boolean");
    return node_.get<bool>();
  }

  Vec3 vec3() const {
    if (!node_.is_array() || node_.size() != 3) fail("expected [x, y, z]");
    auto xs = items();
    return {xs[0].number(), xs[1].number(), xs[2].number()};
  }

  std::map<std::string, bool> flags() const {
    if (!node_.is_object()) fail("expected an object of booleans");
    std::map<std::string, bool> out;
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      Reader(it.value(), child(it.key())).boolean();
      out[it.key()] = it.value().get<bool>();
    }
    return out;
  }

 private:
  std::string child(std::string_view key) const {
    return path_.empty() ? std::string(key) : fmt::format("{}.{}", path_, key);
  }

  const Json& node_;
  std::string path_;
};

Json vec_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

ObjectInstance read_object(const Reader& r) {
  ObjectInstance o;
  o.id = r.at("id").str();
  o.display_name = r.maybe("name") ? r.at("name").str() : o.id;
  if (auto aliases = r.maybe("aliases")) {
    for (const auto& a : aliases->items()) o.aliases.push_back(a.str());
  }
  auto box = r.at("box");
  o.box.center = box.at("center").vec3();
  o.box.half_extents = box.at("half_extents").vec3();
  if (auto s = r.maybe("states")) o.states = s->flags();
  if (auto p = r.maybe("properties")) o.properties = p->flags();
  if (auto d = r.maybe("detectable")) o.detectable = d->boolean();
  return o;
}

Json object_json(const ObjectInstance& o) {
  Json j = {{"id", o.id},
            {"name", o.display_name},
            {"box", {{"center", vec_json(o.box.center)},
                     {"half_extents", vec_json(o.box.half_extents)}}},
            {"states", o.states},
            {"properties", o.properties}};
  if (!o.aliases.empty()) j["aliases"] = o.aliases;
  if (!o.detectable) j["detectable"] = false;
  return j;
}

HumanState read_human(const Reader& r) {
  HumanState h;
  h.name = r.at("name").str();
  h.position = r.at("position").vec3();
  if (auto g = r.maybe("gaze_at_robot")) h.gaze_at_robot = g->boolean();
  if (auto f = r.maybe("hands_free")) h.hands_free = f->boolean();
  if (auto k = r.maybe("recognized")) h.recognized = k->boolean();
  return h;
}

Json human_json(const HumanState& h) {
  return {{"name", h.name},
          {"position", vec_json(h.position)},
          {"gaze_at_robot", h.gaze_at_robot},
          {"hands_free", h.hands_free},
          {"recognized", h.recognized}};
}

std::size_t line_of(std::string_view doc, std::size_t byte) {
  byte = std::min(byte, doc.size());
  return 1 + static_cast<std::size_t>(std::count(doc.begin(), doc.begin() + byte, '\n'));
}

}  // namespace

// ---------------------------------------------------------------------------
// Scene

const ObjectInstance* Scene::find(std::string_view id) const {
  auto it = std::find_if(objects_.begin(), objects_.end(),
                         [&](const ObjectInstance& o) { return o.id == id; });
  return it == objects_.end() ? nullptr : &*it;
}

ObjectInstance* Scene::find_mut(std::string_view id) {
  return const_cast<ObjectInstance*>(std::as_const(*this).find(id));
}

const ObjectInstance& Scene::object(std::string_view id) const {
  if (const auto* o = find(id)) return *o;
  throw NotFoundError(fmt::format("no object with id '{}'", id));
}

const HumanState* Scene::find_human(std::string_view name) const {
  auto it = std::find_if(humans_.begin(), humans_.end(),
                         [&](const HumanState& h) { return h.name == name; });
  return it == humans_.end() ? nullptr : &*it;
}

std::vector<std::string> Scene::detectable_ids() const {
  std::vector<std::string> ids;
  for (const auto& o : objects_) {
    if (o.detectable) ids.push_back(o.id);
  }
  return ids;
}

void Scene::validate() const {
  std::set<std::string> ids;
  for (const auto& o : objects_) {
    if (o.id.empty()) throw ValidationError("object id must not be empty");
    if (!ids.insert(o.id).second)
      throw ValidationError(fmt::format("duplicate object id '{}'", o.id), o.id);
    const auto& he = o.box.half_extents;
    if (!o.box.center.finite() || !he.finite())
      throw ValidationError(fmt::format("object '{}' has non-finite box", o.id), o.id);
    if (he.x <= 0.0 || he.y <= 0.0 || he.z <= 0.0)
      throw ValidationError(
          fmt::format("object '{}' has non-positive half extents", o.id), o.id);
    for (const auto& [label, _] : o.states) {
      if (o.properties.count(label))
        throw ValidationError(
            fmt::format("object '{}' uses '{}' as both state and property", o.id, label),
            o.id);
    }
  }
  if (!robot_.position.finite()) throw ValidationError("robot position is not finite");
  if (!(robot_.reach > 0.0)) throw ValidationError("robot reach must be positive");
  if (!(robot_.body_radius >= 0.0))
    throw ValidationError("robot body_radius must be non-negative");
  if (robot_.holding && !ids.count(*robot_.holding))
    throw ValidationError(
        fmt::format("robot holds unknown object '{}'", *robot_.holding), *robot_.holding);
  std::set<std::string> names;
  for (const auto& h : humans_) {
    if (h.name.empty()) throw ValidationError("human name must not be empty");
    if (!names.insert(h.name).second)
      throw ValidationError(fmt::format("duplicate human name '{}'", h.name), h.name);
    if (!h.position.finite())
      throw ValidationError(fmt::format("human '{}' position is not finite", h.name), h.name);
  }
  for (const auto& target : annotations_.blocked_paths) {
    if (!ids.count(target) && !names.count(target))
      throw ValidationError(
          fmt::format("blocked path annotation names unknown target '{}'", target), target);
  }
}

void Scene::apply(const SceneMutation& m) {
  Scene next = *this;
  auto require = [&](const std::string& id) -> ObjectInstance& {
    if (auto* o = next.find_mut(id)) return *o;
    throw NotFoundError(fmt::format("no object with id '{}'", id));
  };
  std::visit(
      [&](const auto& mut) {
        using T = std::decay_t<decltype(mut)>;
        if constexpr (std::is_same_v<T, mutation::MoveObject>) {
          require(mut.id).box.center = mut.center;
        } else if constexpr (std::is_same_v<T, mutation::SetState>) {
          auto& o = require(mut.id);
          if (o.properties.count(mut.label))
            throw ValidationError(
                fmt::format("'{}' is a property of '{}', not a state", mut.label, mut.id),
                mut.id);
          o.states[mut.label] = mut.value;
        } else if constexpr (std::is_same_v<T, mutation::RemoveObject>) {
          require(mut.id);
          std::erase_if(next.objects_, [&](const ObjectInstance& o) { return o.id == mut.id; });
          std::erase(next.annotations_.blocked_paths, mut.id);
        } else if constexpr (std::is_same_v<T, mutation::AddObject>) {
          next.objects_.push_back(mut.object);
        } else if constexpr (std::is_same_v<T, mutation::SetHumanField>) {
          auto it = std::find_if(next.humans_.begin(), next.humans_.end(),
                                 [&](const HumanState& h) { return h.name == mut.human; });
          if (it == next.humans_.end())
            throw NotFoundError(fmt::format("no human named '{}'", mut.human));
          const Reader value(mut.value, "value");
          if (mut.field == "gaze_at_robot") {
            it->gaze_at_robot = value.boolean();
          } else if (mut.field == "hands_free") {
            it->hands_free = value.boolean();
          } else if (mut.field == "recognized") {
            it->recognized = value.boolean();
          } else if (mut.field == "position") {
            it->position = value.vec3();
          } else {
            throw ValidationError(fmt::format("unknown human field '{}'", mut.field));
          }
        } else if constexpr (std::is_same_v<T, mutation::SetRobotHolding>) {
          if (mut.id) require(*mut.id);
          next.robot_.holding = mut.id;
        } else if constexpr (std::is_same_v<T, mutation::MoveRobot>) {
          next.robot_.position = mut.position;
        }
      },
      m);
  next.validate();
  *this = std::move(next);
}

Json Scene::to_json() const {
  Json objects = Json::array();
  for (const auto& o : objects_) objects.push_back(object_json(o));
  Json humans = Json::array();
  for (const auto& h : humans_) humans.push_back(human_json(h));
  Json robot = {{"position", vec_json(robot_.position)},
                {"reach", robot_.reach},
                {"body_radius", robot_.body_radius},
                {"holding", robot_.holding ? Json(*robot_.holding) : Json(nullptr)}};
  return {{"objects", objects},
          {"robot", robot},
          {"humans", humans},
          {"annotations", {{"blocked_paths", annotations_.blocked_paths}}}};
}

Scene Scene::from_json(const Json& doc) {
  Reader root(doc, "");
  if (!doc.is_object()) root.fail("scene document must be a JSON object");
  Scene s;
  for (const auto& item : root.at("objects").items()) s.objects_.push_back(read_object(item));
  auto robot = root.at("robot");
  s.robot_.position = robot.at("position").vec3();
  if (auto r = robot.maybe("reach")) s.robot_.reach = r->number();
  if (auto r = robot.maybe("body_radius")) s.robot_.body_radius = r->number();
  if (auto h = robot.maybe("holding")) s.robot_.holding = h->str();
  if (auto humans = root.maybe("humans")) {
    for (const auto& item : humans->items()) s.humans_.push_back(read_human(item));
  }
  if (auto ann = root.maybe("annotations")) {
    if (auto blocked = ann->maybe("blocked_paths")) {
      for (const auto& b : blocked->items()) s.annotations_.blocked_paths.push_back(b.str());
    }
  }
  s.validate();
  return s;
}

Scene load_scene(std::string_view document) {
  Json doc;
  try {
    doc = Json::parse(document.begin(), document.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(e.what(), {}, line_of(document, e.byte > 0 ? e.byte - 1 : 0));
  }
  return Scene::from_json(doc);
}

Scene load_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError(fmt::format("cannot open scene file '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_scene(buffer.str());
}

// ---------------------------------------------------------------------------
// Mutations

SceneMutation mutation_from_json(const Json& j) {
  Reader r(j, "mutation");
  const std::string kind = r.at("kind").str();
  if (kind == "move_object") return mutation::MoveObject{r.at("id").str(), r.at("center").vec3()};
  if (kind == "set_state")
    return mutation::SetState{r.at("id").str(), r.at("state").str(), r.at("value").boolean()};
  if (kind == "remove_object") return mutation::RemoveObject{r.at("id").str()};
  if (kind == "add_object") return mutation::AddObject{read_object(r.at("object"))};
  if (kind == "set_human_field") {
    r.at("value");
    return mutation::SetHumanField{r.at("human").str(), r.at("field").str(), j.at("value")};
  }
  if (kind == "set_robot_holding") {
    auto id = r.maybe("id");
    return mutation::SetRobotHolding{id ? std::optional(id->str()) : std::nullopt};
  }
  if (kind == "move_robot") return mutation::MoveRobot{r.at("position").vec3()};
  r.at("kind").fail(fmt::format("unknown mutation kind '{}'", kind));
}

Json to_json(const SceneMutation& m) {
  return std::visit(
      [](const auto& mut) -> Json {
        using T = std::decay_t<decltype(mut)>;
        if constexpr (std::is_same_v<T, mutation::MoveObject>) {
          return {{"kind", "move_object"}, {"id", mut.id}, {"center", vec_json(mut.center)}};
        } else if constexpr (std::is_same_v<T, mutation::SetState>) {
          return {{"kind", "set_state"}, {"id", mut.id}, {"state", mut.label},
                  {"value", mut.value}};
        } else if constexpr (std::is_same_v<T, mutation::RemoveObject>) {
          return {{"kind", "remove_object"}, {"id", mut.id}};
        } else if constexpr (std::is_same_v<T, mutation::AddObject>) {
          return {{"kind", "add_object"}, {"object", object_json(mut.object)}};
        } else if constexpr (std::is_same_v<T, mutation::SetHumanField>) {
          return {{"kind", "set_human_field"}, {"human", mut.human}, {"field", mut.field},
                  {"value", mut.value}};
        } else if constexpr (std::is_same_v<T, mutation::SetRobotHolding>) {
          return {{"kind", "set_robot_holding"},
                  {"id", mut.id ? Json(*mut.id) : Json(nullptr)}};
        } else {
          return {{"kind", "move_robot"}, {"position", vec_json(mut.position)}};
        }
      },
      m);
}

// ---------------------------------------------------------------------------
// Distances and paths

double distance_robot_to(const Scene& scene, std::string_view id) {
  return scene.object(id).box.distance_to(scene.robot().position);
}

double distance_between(const Scene& scene, std::string_view a, std::string_view b) {
  return scene.object(a).box.distance_to(scene.object(b).box);
}

double distance_robot_to_human(const Scene& scene, std::string_view name) {
  const auto* h = scene.find_human(name);
  if (!h) throw NotFoundError(fmt::format("no human named '{}'", name));
  return (h->position - scene.robot().position).norm();
}

namespace {

// Items lower than this sit flat on the floor (rugs, floor zones) and never
// obstruct driving.
constexpr double kFloorClearance = 0.05;

bool rests_on(const Aabb& upper, const Aabb& lower) {
  return containment_fraction(upper, lower) >= RelationThresholds::kInside ||
         (support_fraction(upper, lower) >= RelationThresholds::kSupportOverlap &&
          std::abs(upper.bottom() - lower.top()) <= RelationThresholds::kSupportGap);
}

// Objects stacked on or under the target, transitively. They share the
// target's footprint and are reached with it.
std::set<std::string> support_chain(const Scene& scene, const ObjectInstance& target) {
  std::set<std::string> chain{target.id};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& o : scene.objects()) {
      if (chain.count(o.id)) continue;
      for (const auto& member : chain) {
        const auto& m = scene.object(member);
        if (rests_on(o.box, m.box) || rests_on(m.box, o.box)) {
          chain.insert(o.id);
          grew = true;
          break;
        }
      }
    }
  }
  return chain;
}

}  // namespace

bool check_free_path(const Scene& scene, std::string_view target) {
  return check_free_path(scene, target, scene.robot().body_radius);
}

bool check_free_path(const Scene& scene, std::string_view target, double body_radius) {
  const auto& robot = scene.robot();
  const Vec2 start{robot.position.x, robot.position.y};
  Vec2 goal;
  std::set<std::string> ignored;
  if (const auto* t = scene.find(target)) {
    const auto lo = t->box.min(), hi = t->box.max();
    goal = {std::clamp(start.x, lo.x, hi.x), std::clamp(start.y, lo.y, hi.y)};
    ignored = support_chain(scene, *t);
  } else if (const auto* h = scene.find_human(target)) {
    goal = {h->position.x, h->position.y};
  } else {
    throw NotFoundError(fmt::format("no object or human '{}'", target));
  }
  const auto& blocked = scene.annotations().blocked_paths;
  if (std::find(blocked.begin(), blocked.end(), target) != blocked.end()) return false;
  if (robot.holding) ignored.insert(*robot.holding);

  for (const auto& o : scene.objects()) {
    if (ignored.count(o.id) || o.box.top() <= kFloorClearance) continue;
    const auto lo = o.box.min(), hi = o.box.max();
    if (segment_rect_distance(start, goal, {lo.x, lo.y}, {hi.x, hi.y}) < body_radius)
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Description

namespace {

std::string flag_list(const std::map<std::string, bool>& flags) {
  std::vector<std::string> parts;
  for (const auto& [label, value] : flags) parts.push_back(value ? label : "not " + label);
  if (parts.empty()) return "none";
  return fmt::format("{}", fmt::join(parts, ", "));
}

}  // namespace

std::string describe_scene(const Scene& scene) {
  const auto ids = scene.detectable_ids();
  const bool no_extras = !scene.robot().holding && scene.humans().empty();
  if (ids.empty() && no_extras) return "No objects detected.";

  const std::set<std::string> visible(ids.begin(), ids.end());
  const auto relations = compute_relations(scene);

  std::string out;
  if (ids.empty()) {
    out += "No objects detected.\n";
  } else {
    out += "Objects in the scene:\n";
  }
  for (const auto& o : scene.objects()) {
    if (!o.detectable) continue;
    std::vector<std::string> rels;
    for (const auto& r : relations) {
      if (r.subject == o.id && visible.count(r.object))
        rels.push_back(fmt::format("{} {}", to_phrase(r.relation), r.object));
    }
    out += fmt::format("- {}", o.id);
    if (o.display_name != o.id) out += fmt::format(" ({})", o.display_name);
    out += fmt::format(": states: {}; properties: {}; relations: {}.\n", flag_list(o.states),
                       flag_list(o.properties),
                       rels.empty() ? std::string("none") : fmt::format("{}", fmt::join(rels, ", ")));
  }
  out += fmt::format("Robot holding: {}.\n",
                     scene.robot().holding ? *scene.robot().holding : std::string("nothing"));
  if (!scene.humans().empty()) {
    out += "Humans:\n";
    for (const auto& h : scene.humans()) {
      out += fmt::format("- {}: looking at robot: {}; hands free: {}; distance: {}m.\n",
                         h.recognized ? h.name : "unrecognized person",
                         h.gaze_at_robot ? "yes" : "no", h.hands_free ? "yes" : "no",
                         text::format_length((h.position - scene.robot().position).norm()));
    }
  }
  return out;
}

}  // namespace raider
