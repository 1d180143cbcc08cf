#pragma once

#include <cmath>

namespace raider {

/// Position or offset in meters. Scene frame: x to the robot's right,
/// y forward, z up.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  /// Length of the overlap with `other`, 0 when disjoint.
  double overlap(const Interval& other) const;
  /// Distance between the intervals, 0 when they touch or overlap.
  double gap(const Interval& other) const;
};

/// Axis-aligned box given by center and strictly positive half extents.
struct Aabb {
  Vec3 center;
  Vec3 half_extents;

  Vec3 min() const { return center - half_extents; }
  Vec3 max() const { return center + half_extents; }
  Interval x() const { return {center.x - half_extents.x, center.x + half_extents.x}; }
  Interval y() const { return {center.y - half_extents.y, center.y + half_extents.y}; }
  Interval z() const { return {center.z - half_extents.z, center.z + half_extents.z}; }
  double bottom() const { return center.z - half_extents.z; }
  double top() const { return center.z + half_extents.z; }

  double volume() const { return 8.0 * half_extents.x * half_extents.y * half_extents.z; }
  double footprint_area() const { return 4.0 * half_extents.x * half_extents.y; }

  bool contains(const Vec3& p) const;
  /// Euclidean distance from `p` to the nearest point of the box.
  double distance_to(const Vec3& p) const;
  /// Nearest-point distance between two boxes.
  double distance_to(const Aabb& other) const;
  double intersection_volume(const Aabb& other) const;
  /// Area of the overlap of the two boxes projected onto the floor.
  double footprint_overlap(const Aabb& other) const;

  friend bool operator==(const Aabb&, const Aabb&) = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Distance between segment [a, b] and the axis-aligned rectangle
/// [lo, hi] in the plane; 0 when they intersect.
double segment_rect_distance(Vec2 a, Vec2 b, Vec2 lo, Vec2 hi);

}  // namespace raider
