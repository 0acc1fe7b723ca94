#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace idmkit {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

struct LaneGeometry {
  int lane_id = 0;
  std::vector<Vec2> centerline;  // >= 2 points, strictly increasing arc length
  double width = 3.6576;
};

struct LaneProjection {
  double s = 0.0;       // arc length of the closest centerline point
  double offset = 0.0;  // signed lateral offset, positive left of travel direction
  double tangent = 0.0; // tangent angle at the closest point
};

double lane_length(const LaneGeometry& lane);
LaneProjection project_to_lane(const LaneGeometry& lane, Vec2 p);

// Point at arc length s. Throws LaneExhaustedError outside [0, length].
Vec2 lane_point_at(const LaneGeometry& lane, double s);
double lane_tangent_at(const LaneGeometry& lane, double s);

double point_polyline_distance(std::span<const Vec2> polyline, Vec2 p);

}  // namespace idmkit
