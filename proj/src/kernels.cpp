#include "socnav/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "socnav/crowd.hpp"
#include "socnav/scene.hpp"
#include "socnav/sensing.hpp"

namespace socnav {

namespace {

bool cell_occupied(const Scene& scene, double inflation, Vec2 c) {
  if (scene.bounds.interior_clearance(c) <= inflation) return true;
  for (const auto& poly : scene.obstacles) {
    if (distance_to_polygon(c, poly) <= inflation) return true;
  }
  return false;
}

void rasterize_row(const Scene& scene, double inflation, OccupancyGrid& grid, int row) {
  for (int col = 0; col < grid.cols(); ++col) {
    const Cell c{col, row};
    grid.set(c, cell_occupied(scene, inflation, grid.center(c)));
  }
}

double cast_beam(Vec2 origin, Vec2 dir, std::span<const AgentCircle> circles, const Scene& scene,
                 const ScanSpec& spec) {
  if (!scene.bounds.contains(origin)) return spec.r_min;
  double best = spec.r_max;
  const auto consider = [&](double t) {
    if (t >= 0.0 && t < best) best = t;
  };

  const Bounds& b = scene.bounds;
  const Vec2 corners[4] = {{b.min_x, b.min_y}, {b.max_x, b.min_y}, {b.max_x, b.max_y}, {b.min_x, b.max_y}};
  for (int i = 0; i < 4; ++i) consider(ray_segment_hit(origin, dir, corners[i], corners[(i + 1) % 4]));

  for (const auto& poly : scene.obstacles) {
    if (point_in_polygon(origin, poly)) return spec.r_min;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
      consider(ray_segment_hit(origin, dir, poly[i], poly[(i + 1) % n]));
    }
  }
  for (const auto& c : circles) consider(ray_circle_hit(origin, dir, c.position, c.radius));
  return std::clamp(best, spec.r_min, spec.r_max);
}

Vec2 beam_direction(const Pose2D& origin, const ScanSpec& spec, int k) {
  const double a = origin.theta + spec.beam_angle(k);
  return {std::cos(a), std::sin(a)};
}

}  // namespace

void rasterize_rows(const Scene& scene, double inflation, OccupancyGrid& grid) {
  const int rows = grid.rows();
#pragma omp parallel for schedule(static) if (rows >= kParallelThreshold)
  for (int row = 0; row < rows; ++row) rasterize_row(scene, inflation, grid, row);
}

void rasterize_rows_serial(const Scene& scene, double inflation, OccupancyGrid& grid) {
  for (int row = 0; row < grid.rows(); ++row) rasterize_row(scene, inflation, grid, row);
}

std::vector<Vec2> compute_forces(std::span<const Pedestrian> peds, const AgentCircle& robot, const Scene& scene,
                                 const SocialForceParams& params) {
  const int n = static_cast<int>(peds.size());
  std::vector<Vec2> forces(peds.size());
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (int i = 0; i < n; ++i) forces[i] = social_force_in_crowd(peds[i], peds, robot, scene, params);
  return forces;
}

std::vector<Vec2> compute_forces_serial(std::span<const Pedestrian> peds, const AgentCircle& robot,
                                        const Scene& scene, const SocialForceParams& params) {
  std::vector<Vec2> forces;
  forces.reserve(peds.size());
  for (const auto& ped : peds) forces.push_back(social_force_in_crowd(ped, peds, robot, scene, params));
  return forces;
}

std::vector<double> cast_beams(Pose2D origin, std::span<const AgentCircle> circles, const Scene& scene,
                               const ScanSpec& spec) {
  const int n = spec.beam_count;
  std::vector<double> ranges(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (int k = 0; k < n; ++k) {
    ranges[k] = cast_beam(origin.position(), beam_direction(origin, spec, k), circles, scene, spec);
  }
  return ranges;
}

std::vector<double> cast_beams_serial(Pose2D origin, std::span<const AgentCircle> circles, const Scene& scene,
                                      const ScanSpec& spec) {
  std::vector<double> ranges;
  ranges.reserve(static_cast<std::size_t>(spec.beam_count));
  for (int k = 0; k < spec.beam_count; ++k) {
    ranges.push_back(cast_beam(origin.position(), beam_direction(origin, spec, k), circles, scene, spec));
  }
  return ranges;
}

}  // namespace socnav
