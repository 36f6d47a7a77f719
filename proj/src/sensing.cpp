#include "socnav/sensing.hpp"

#include <algorithm>

#include "socnav/errors.hpp"
#include "socnav/kernels.hpp"
#include "socnav/world.hpp"

namespace socnav {

void validate_scan_spec(const ScanSpec& spec) {
  if (spec.beam_count < 1) throw ConfigError("scan.beam_count must be >= 1");
  if (!(spec.r_min > 0.0 && spec.r_min < spec.r_max)) throw ConfigError("scan ranges must satisfy 0 < r_min < r_max");
  if (!(spec.fov > 0.0 && spec.fov <= 2.0 * std::numbers::pi)) throw ConfigError("scan.fov must be in (0, 2pi]");
}

std::vector<double> lidar_scan(const WorldState& world, const Scene& scene, const ScanSpec& spec) {
  std::vector<AgentCircle> circles;
  circles.reserve(world.pedestrians.size());
  for (const auto& ped : world.pedestrians) circles.push_back({ped.pose.position(), ped.radius});
  return cast_beams(world.robot.pose, circles, scene, spec);
}

std::optional<double> nearest_pedestrian_distance(const WorldState& world) {
  std::optional<double> best;
  const Vec2 p = world.robot.pose.position();
  const double r = world.robot.spec.footprint_radius;
  for (const auto& ped : world.pedestrians) {
    const double d = std::max(0.0, distance(p, ped.pose.position()) - r - ped.radius);
    if (!best || d < *best) best = d;
  }
  return best;
}

Observation make_observation(const WorldState& world, const Scene& scene, const Pose2D& goal, const ScanSpec& spec) {
  Observation obs;
  obs.tick = world.tick;
  obs.sim_time = world.sim_time();
  obs.pose = world.robot.pose;
  obs.twist = world.robot.twist;
  obs.goal = goal;
  obs.scan = lidar_scan(world, scene, spec);
  obs.nearest_ped_distance = nearest_pedestrian_distance(world);
  return obs;
}

}  // namespace socnav
