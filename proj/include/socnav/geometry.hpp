#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace socnav {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  bool operator==(const Vec2&) const = default;

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Planar pose. Heading is kept in (-pi, pi].
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose2D&) const = default;
};

/// Velocity command for a unicycle: signed linear and angular speed.
struct Twist {
  double v = 0.0;
  double w = 0.0;
  bool operator==(const Twist&) const = default;
};

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  if (a > -kPi && a <= kPi) return a;
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

struct Bounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  double area() const { return width() * height(); }
  bool contains(Vec2 p) const { return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y; }
  /// Distance from an interior point to the nearest edge; negative outside.
  double interior_clearance(Vec2 p) const {
    return std::min(std::min(p.x - min_x, max_x - p.x), std::min(p.y - min_y, max_y - p.y));
  }
  bool operator==(const Bounds&) const = default;
};

using Polygon = std::vector<Vec2>;

double signed_area(std::span<const Vec2> poly);

/// Closest point on segment [a, b] to p.
Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b);

/// Even-odd rule. Points on the boundary may report either side; combine
/// with an edge distance test when the boundary matters.
bool point_in_polygon(Vec2 p, std::span<const Vec2> poly);

/// Distance from p to the polygon's boundary.
double distance_to_boundary(Vec2 p, std::span<const Vec2> poly);

/// Distance from p to the filled polygon: zero inside or on the boundary.
double distance_to_polygon(Vec2 p, std::span<const Vec2> poly);

/// Signed distance: negative inside, positive outside.
double signed_distance_to_polygon(Vec2 p, std::span<const Vec2> poly);

/// Nearest point on the polygon's boundary.
Vec2 closest_point_on_polygon(Vec2 p, std::span<const Vec2> poly);

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2);

/// True when no two non-adjacent edges touch.
bool is_simple_polygon(std::span<const Vec2> poly);

/// Ray parameter t >= 0 at which origin + t*dir meets segment [a, b].
/// `dir` must be unit length. Returns a negative value on a miss.
double ray_segment_hit(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b);

/// First t >= 0 where the ray enters (or, from inside, leaves) the circle.
/// `dir` must be unit length. Returns a negative value on a miss.
double ray_circle_hit(Vec2 origin, Vec2 dir, Vec2 center, double radius);

}  // namespace socnav
