#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "raider/geometry.hpp"

namespace raider {

using Json = nlohmann::json;

struct ObjectInstance {
  std::string id;
  std::string display_name;
  std::vector<std::string> aliases;
  Aabb box;
  std::map<std::string, bool> states;      // open, on, sliced, clean, ...
  std::map<std::string, bool> properties;  // openable, toggleable, pickable, ...
  bool detectable = true;                  // reported by object_detection

  bool state(std::string_view label) const;
  bool property(std::string_view label) const;
  bool has_state(std::string_view label) const;
};

struct RobotState {
  Vec3 position;
  double reach = 1.1;
  double body_radius = 0.3;
  std::optional<std::string> holding;
};

/// Name reported for a human the robot sees but cannot identify.
inline constexpr std::string_view kUnrecognizedHuman = "-1";

struct HumanState {
  std::string name;
  Vec3 position;
  bool gaze_at_robot = false;
  bool hands_free = true;
  bool recognized = true;

  std::string reported_name() const {
    return recognized ? name : std::string(kUnrecognizedHuman);
  }
};

struct SceneAnnotations {
  std::vector<std::string> blocked_paths;
};

enum class Relation { Inside, OnTopOf, LeftOf, RightOf, Above, Below, Occluding, Near };

inline constexpr Relation kAllRelations[] = {Relation::Inside,  Relation::OnTopOf,
                                             Relation::LeftOf,  Relation::RightOf,
                                             Relation::Above,   Relation::Below,
                                             Relation::Occluding, Relation::Near};

/// Identifier form: "inside", "on_top_of", ...
std::string_view to_string(Relation r);
/// Prose form used in tool output and scene descriptions: "on top of".
std::string_view to_phrase(Relation r);
std::optional<Relation> relation_from_string(std::string_view s);

struct SpatialRelation {
  std::string subject;
  Relation relation;
  std::string object;

  auto operator<=>(const SpatialRelation&) const = default;
};

namespace mutation {
struct MoveObject {
  std::string id;
  Vec3 center;
};
struct SetState {
  std::string id;
  std::string label;
  bool value = false;
};
struct RemoveObject {
  std::string id;
};
struct AddObject {
  ObjectInstance object;
};
struct SetHumanField {
  std::string human;
  std::string field;  // gaze_at_robot | hands_free | recognized | position
  Json value;
};
struct SetRobotHolding {
  std::optional<std::string> id;
};
struct MoveRobot {
  Vec3 position;
};
}  // namespace mutation

using SceneMutation =
    std::variant<mutation::MoveObject, mutation::SetState, mutation::RemoveObject,
                 mutation::AddObject, mutation::SetHumanField, mutation::SetRobotHolding,
                 mutation::MoveRobot>;

SceneMutation mutation_from_json(const Json& j);
Json to_json(const SceneMutation& m);

class Scene {
 public:
  Scene() = default;

  const std::vector<ObjectInstance>& objects() const { return objects_; }
  const RobotState& robot() const { return robot_; }
  const std::vector<HumanState>& humans() const { return humans_; }
  const SceneAnnotations& annotations() const { return annotations_; }

  const ObjectInstance* find(std::string_view id) const;
  /// Throws NotFoundError.
  const ObjectInstance& object(std::string_view id) const;
  const HumanState* find_human(std::string_view name) const;

  /// Ids of objects perception reports, in document order.
  std::vector<std::string> detectable_ids() const;

  /// Throws ValidationError naming the offending id.
  void validate() const;

  /// Applies atomically: on any error the scene is left unchanged.
  void apply(const SceneMutation& m);

  Json to_json() const;
  static Scene from_json(const Json& doc);

  // Direct construction, mostly for tests and generators.
  void add_object(ObjectInstance o) { objects_.push_back(std::move(o)); }
  void add_human(HumanState h) { humans_.push_back(std::move(h)); }
  RobotState& robot_mut() { return robot_; }
  SceneAnnotations& annotations_mut() { return annotations_; }

  friend bool operator==(const Scene& a, const Scene& b) { return a.to_json() == b.to_json(); }

 private:
  ObjectInstance* find_mut(std::string_view id);

  std::vector<ObjectInstance> objects_;
  RobotState robot_;
  std::vector<HumanState> humans_;
  SceneAnnotations annotations_;
};

/// Parses and validates a scene document (JSON text).
Scene load_scene(std::string_view document);
Scene load_scene_file(const std::string& path);

/// Computed over every object pair, including objects perception does not
/// report.
std::set<SpatialRelation> compute_relations(const Scene& scene);

/// Fraction of `a`'s volume inside `b`.
double containment_fraction(const Aabb& a, const Aabb& b);
/// Fraction of `a`'s footprint overlapping `b`'s footprint.
double support_fraction(const Aabb& a, const Aabb& b);
/// Fraction of `b`'s horizontal angular extent (seen from `eye`) covered by
/// `a`'s; 0 when the eye is inside either footprint.
double angular_overlap_fraction(const Vec3& eye, const Aabb& a, const Aabb& b);

struct RelationThresholds {
  static constexpr double kNear = 0.5;
  static constexpr double kInside = 0.8;
  static constexpr double kSupportOverlap = 0.5;
  static constexpr double kSupportGap = 0.02;
  static constexpr double kOcclusion = 0.3;
};

/// Nearest-point distance from the robot position to the object's box.
double distance_robot_to(const Scene& scene, std::string_view id);
double distance_between(const Scene& scene, std::string_view a, std::string_view b);
double distance_robot_to_human(const Scene& scene, std::string_view name);

/// True iff nothing blocks the straight drive to `target` (object id or
/// human name). A blocked-path annotation for the target always wins.
bool check_free_path(const Scene& scene, std::string_view target);
/// Same test with an explicit body radius.
bool check_free_path(const Scene& scene, std::string_view target, double body_radius);

std::string describe_scene(const Scene& scene);

}  // namespace raider
