#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "raider/scene.hpp"

namespace raider {

double containment_fraction(const Aabb& a, const Aabb& b) {
  return a.intersection_volume(b) / a.volume();
}

double support_fraction(const Aabb& a, const Aabb& b) {
  return a.footprint_overlap(b) / a.footprint_area();
}

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
  while (a <= -kPi) a += 2.0 * kPi;
  while (a > kPi) a -= 2.0 * kPi;
  return a;
}

bool footprint_contains(const Aabb& box, const Vec3& p) {
  return p.x >= box.x().lo && p.x <= box.x().hi && p.y >= box.y().lo && p.y <= box.y().hi;
}

// Horizontal angular interval of the box footprint seen from `eye`, measured
// relative to `reference` so the interval never wraps.
Interval azimuth_extent(const Vec3& eye, const Aabb& box, double reference) {
  const auto lo = box.min(), hi = box.max();
  const double xs[] = {lo.x, hi.x};
  const double ys[] = {lo.y, hi.y};
  Interval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (double x : xs) {
    for (double y : ys) {
      const double a = wrap_angle(std::atan2(y - eye.y, x - eye.x) - reference);
      out.lo = std::min(out.lo, a);
      out.hi = std::max(out.hi, a);
    }
  }
  return out;
}

}  // namespace

double angular_overlap_fraction(const Vec3& eye, const Aabb& a, const Aabb& b) {
  if (footprint_contains(a, eye) || footprint_contains(b, eye)) return 0.0;
  const double reference = std::atan2(b.center.y - eye.y, b.center.x - eye.x);
  const Interval ea = azimuth_extent(eye, a, reference);
  const Interval eb = azimuth_extent(eye, b, reference);
  if (eb.length() <= 0.0) return 0.0;
  // A box on the far side of the eye would straddle the +-pi seam.
  if (ea.length() > kPi) return 0.0;
  return ea.overlap(eb) / eb.length();
}

std::set<SpatialRelation> compute_relations(const Scene& scene) {
  std::set<SpatialRelation> out;
  const auto& objects = scene.objects();
  const Vec3 eye = scene.robot().position;
  for (const auto& a : objects) {
    for (const auto& b : objects) {
      if (a.id == b.id) continue;
      const Aabb& ba = a.box;
      const Aabb& bb = b.box;
      auto add = [&](Relation r) { out.insert({a.id, r, b.id}); };

      if (ba.distance_to(bb) < RelationThresholds::kNear) add(Relation::Near);

      const bool inside = containment_fraction(ba, bb) >= RelationThresholds::kInside;
      if (inside) add(Relation::Inside);
      if (!inside && support_fraction(ba, bb) >= RelationThresholds::kSupportOverlap &&
          std::abs(ba.bottom() - bb.top()) <= RelationThresholds::kSupportGap)
        add(Relation::OnTopOf);

      if (ba.z().overlap(bb.z()) > 0.0) {
        if (ba.center.x < bb.center.x) add(Relation::LeftOf);
        if (ba.center.x > bb.center.x) add(Relation::RightOf);
      }
      if (ba.footprint_overlap(bb) > 0.0) {
        if (ba.center.z > bb.center.z) add(Relation::Above);
        if (ba.center.z < bb.center.z) add(Relation::Below);
      }

      if (ba.distance_to(eye) < bb.distance_to(eye) &&
          angular_overlap_fraction(eye, ba, bb) >= RelationThresholds::kOcclusion)
        add(Relation::Occluding);
    }
  }
  return out;
}

}  // namespace raider
