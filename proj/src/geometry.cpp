#include "raider/geometry.hpp"

#include <algorithm>
#include <array>

namespace raider {

double Interval::overlap(const Interval& other) const {
  return std::max(0.0, std::min(hi, other.hi) - std::max(lo, other.lo));
}

double Interval::gap(const Interval& other) const {
  return std::max({0.0, other.lo - hi, lo - other.hi});
}

bool Aabb::contains(const Vec3& p) const {
  const Vec3 lo = min(), hi = max();
  return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z &&
         p.z <= hi.z;
}

double Aabb::distance_to(const Vec3& p) const {
  const double dx = Interval{p.x, p.x}.gap(x());
  const double dy = Interval{p.y, p.y}.gap(y());
  const double dz = Interval{p.z, p.z}.gap(z());
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double Aabb::distance_to(const Aabb& other) const {
  const double dx = x().gap(other.x());
  const double dy = y().gap(other.y());
  const double dz = z().gap(other.z());
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double Aabb::intersection_volume(const Aabb& other) const {
  return x().overlap(other.x()) * y().overlap(other.y()) * z().overlap(other.z());
}

double Aabb::footprint_overlap(const Aabb& other) const {
  return x().overlap(other.x()) * y().overlap(other.y());
}

namespace {

double point_rect_distance(Vec2 p, Vec2 lo, Vec2 hi) {
  const double dx = std::max({0.0, lo.x - p.x, p.x - hi.x});
  const double dy = std::max({0.0, lo.y - p.y, p.y - hi.y});
  return std::sqrt(dx * dx + dy * dy);
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len2, 0.0, 1.0);
  const double dx = a.x + t * vx - p.x, dy = a.y + t * vy - p.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Liang-Barsky clip of the segment against the rectangle.
bool segment_hits_rect(Vec2 a, Vec2 b, Vec2 lo, Vec2 hi) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = b.x - a.x, dy = b.y - a.y;
  const std::array<double, 4> p{-dx, dx, -dy, dy};
  const std::array<double, 4> q{a.x - lo.x, hi.x - a.x, a.y - lo.y, hi.y - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

double segment_rect_distance(Vec2 a, Vec2 b, Vec2 lo, Vec2 hi) {
  if (segment_hits_rect(a, b, lo, hi)) return 0.0;
  double best = std::min(point_rect_distance(a, lo, hi), point_rect_distance(b, lo, hi));
  const std::array<Vec2, 4> corners{Vec2{lo.x, lo.y}, Vec2{hi.x, lo.y}, Vec2{lo.x, hi.y},
                                    Vec2{hi.x, hi.y}};
  for (const auto& c : corners) best = std::min(best, point_segment_distance(c, a, b));
  return best;
}

}  // namespace raider
