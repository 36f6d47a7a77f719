#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "socnav/geometry.hpp"

namespace socnav {

struct Scene;
struct WorldState;

/// Planar range scanner. Beam k points at heading + angular_offset + k*fov/beam_count.
struct ScanSpec {
  int beam_count = 360;
  double fov = 2.0 * std::numbers::pi;
  double r_min = 0.1;
  double r_max = 30.0;
  double angular_offset = 0.0;

  double beam_angle(int k) const { return angular_offset + k * fov / beam_count; }
  bool operator==(const ScanSpec&) const = default;
};

/// Throws ConfigError on invalid fields.
void validate_scan_spec(const ScanSpec& spec);

/// What a controller receives each tick.
struct Observation {
  std::int64_t tick = 0;
  double sim_time = 0.0;
  Pose2D pose;
  Twist twist;
  Pose2D goal;
  std::vector<double> scan;
  std::optional<double> nearest_ped_distance;

  bool operator==(const Observation&) const = default;
};

/// Exact ray casting against obstacle edges, scene bounds and pedestrian
/// circles. The robot itself is never hit.
std::vector<double> lidar_scan(const WorldState& world, const Scene& scene, const ScanSpec& spec);

/// Smallest surface distance (center distance minus radii, floored at 0)
/// between the robot and any pedestrian; absent with no pedestrians.
std::optional<double> nearest_pedestrian_distance(const WorldState& world);

Observation make_observation(const WorldState& world, const Scene& scene, const Pose2D& goal, const ScanSpec& spec);

}  // namespace socnav
