#include "idmkit/geometry.hpp"

#include <algorithm>
#include <limits>

#include "idmkit/errors.hpp"

namespace idmkit {

double normalize_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

double lane_length(const LaneGeometry& lane) {
  double len = 0.0;
  for (std::size_t i = 1; i < lane.centerline.size(); ++i) {
    len += norm(lane.centerline[i] - lane.centerline[i - 1]);
  }
  return len;
}

LaneProjection project_to_lane(const LaneGeometry& lane, Vec2 p) {
  const auto& pts = lane.centerline;
  double best_d2 = std::numeric_limits<double>::infinity();
  LaneProjection best;
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 a = pts[i];
    const Vec2 b = pts[i + 1];
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 <= 0.0) continue;
    const double seg_len = std::sqrt(len2);
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 q = a + t * ab;
    const Vec2 d = p - q;
    const double d2 = dot(d, d);
    if (d2 < best_d2) {
      best_d2 = d2;
      const Vec2 dir = (1.0 / seg_len) * ab;
      best.s = cum + t * seg_len;
      best.offset = cross(dir, d);  // positive = left of travel direction
      best.tangent = std::atan2(dir.y, dir.x);
    }
    cum += seg_len;
  }
  if (!std::isfinite(best_d2)) {
    throw Error("lane centerline has no usable segment");
  }
  return best;
}

namespace {

// Locates the segment containing arc length s; returns interpolation data.
struct SegAt {
  Vec2 point;
  Vec2 dir;
};

SegAt segment_at(const LaneGeometry& lane, double s) {
  const auto& pts = lane.centerline;
  if (pts.size() < 2) throw Error("lane centerline has fewer than 2 points");
  const double total = lane_length(lane);
  constexpr double kTol = 1e-9;
  if (s < -kTol || s > total + kTol) {
    throw LaneExhaustedError("arc length outside lane centerline");
  }
  s = std::clamp(s, 0.0, total);
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 ab = pts[i + 1] - pts[i];
    const double seg_len = norm(ab);
    if (seg_len <= 0.0) continue;
    if (s <= cum + seg_len || i + 2 == pts.size()) {
      const double t = std::clamp((s - cum) / seg_len, 0.0, 1.0);
      return {pts[i] + t * ab, (1.0 / seg_len) * ab};
    }
    cum += seg_len;
  }
  throw LaneExhaustedError("arc length outside lane centerline");
}

}  // namespace

Vec2 lane_point_at(const LaneGeometry& lane, double s) { return segment_at(lane, s).point; }

double lane_tangent_at(const LaneGeometry& lane, double s) {
  const Vec2 dir = segment_at(lane, s).dir;
  return std::atan2(dir.y, dir.x);
}

double point_polyline_distance(std::span<const Vec2> polyline, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vec2 a = polyline[i];
    const Vec2 b = polyline[i + 1];
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, norm(p - (a + t * ab)));
  }
  if (polyline.size() == 1) best = norm(p - polyline[0]);
  return best;
}

}  // namespace idmkit
