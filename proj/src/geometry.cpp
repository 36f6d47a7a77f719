#include "socnav/geometry.hpp"

#include <limits>

namespace socnav {

double signed_area(std::span<const Vec2> poly) {
  double twice = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    twice += poly[i].cross(poly[(i + 1) % n]);
  }
  return 0.5 * twice;
}

Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 <= 0.0) return a;
  double t = (p - a).dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return a + ab * t;
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
  bool inside = false;
  for (std::size_t i = 0, n = poly.size(), j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double distance_to_boundary(Vec2 p, std::span<const Vec2> poly) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2 c = closest_point_on_segment(p, poly[i], poly[(i + 1) % n]);
    best = std::min(best, distance(p, c));
  }
  return best;
}

double distance_to_polygon(Vec2 p, std::span<const Vec2> poly) {
  if (point_in_polygon(p, poly)) return 0.0;
  return distance_to_boundary(p, poly);
}

double signed_distance_to_polygon(Vec2 p, std::span<const Vec2> poly) {
  const double d = distance_to_boundary(p, poly);
  return point_in_polygon(p, poly) ? -d : d;
}

Vec2 closest_point_on_polygon(Vec2 p, std::span<const Vec2> poly) {
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_point = poly.empty() ? p : poly.front();
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2 c = closest_point_on_segment(p, poly[i], poly[(i + 1) % n]);
    const double d = distance(p, c);
    if (d < best) {
      best = d;
      best_point = c;
    }
  }
  return best_point;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = (b - a).cross(c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

bool is_simple_polygon(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a1 = poly[i];
    const Vec2 a2 = poly[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(a1, a2, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

double ray_segment_hit(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
  const Vec2 e = b - a;
  const double denom = dir.cross(e);
  const Vec2 ao = a - origin;
  if (denom == 0.0) {
    // Parallel. Collinear overlap reports the nearest endpoint ahead.
    if (ao.cross(dir) != 0.0) return -1.0;
    const double ta = ao.dot(dir);
    const double tb = (b - origin).dot(dir);
    if (ta < 0.0 && tb < 0.0) return -1.0;
    if (ta <= 0.0 || tb <= 0.0) return 0.0;
    return std::min(ta, tb);
  }
  const double t = ao.cross(e) / denom;
  const double u = ao.cross(dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return -1.0;
  return t;
}

double ray_circle_hit(Vec2 origin, Vec2 dir, Vec2 center, double radius) {
  const Vec2 oc = origin - center;
  const double c = oc.dot(oc) - radius * radius;
  if (c <= 0.0) return 0.0;
  const double b = oc.dot(dir);
  if (b >= 0.0) return -1.0;
  const double disc = b * b - c;
  if (disc < 0.0) return -1.0;
  // c / q form avoids cancellation for distant circles.
  const double q = -b + std::sqrt(disc);
  return c / q;
}

}  // namespace socnav
