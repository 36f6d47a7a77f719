#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "socnav/crowd_params.hpp"
#include "socnav/geometry.hpp"
#include "socnav/kernels.hpp"
#include "socnav/occupancy.hpp"
#include "socnav/rng.hpp"

namespace socnav {

struct Scene;

struct Pedestrian {
  int id = 0;
  Pose2D pose;
  Vec2 velocity;
  double radius = kPedestrianRadius;
  double desired_speed = 1.0;
  Pose2D goal;
  int goal_anchor = -1;
  /// Remaining path; the last entry is the goal position.
  std::vector<Vec2> waypoints;
  /// Private stream for new goals on arrival.
  std::uint64_t rng_state = 0;

  bool operator==(const Pedestrian&) const = default;
};

/// Goal-driving term plus exponential repulsion from other pedestrians,
/// the robot and the nearest static geometry.
Vec2 social_force(const Pedestrian& ped, std::span<const Pedestrian> others, const AgentCircle& robot,
                  const Scene& scene, const SocialForceParams& params);

/// Same as social_force but with `ped` allowed inside `all`; it is skipped
/// by id. This is the per-element body of the parallel force kernel.
Vec2 social_force_in_crowd(const Pedestrian& ped, std::span<const Pedestrian> all, const AgentCircle& robot,
                           const Scene& scene, const SocialForceParams& params);

/// Deterministic unit vector used when two agent centers coincide. The
/// vector for (a, b) is the negation of the one for (b, a).
Vec2 coincident_direction(int id_a, int id_b);

/// What a pedestrian needs to pick a new goal once it arrives.
struct RegoalContext {
  const Scene* scene = nullptr;
  const OccupancyGrid* grid = nullptr;
};

/// Semi-implicit Euler with speed cap, heading update and waypoint
/// bookkeeping. With a regoal context an arrived pedestrian draws a new
/// goal from its own stream.
Pedestrian step_pedestrian(Pedestrian ped, Vec2 force, double dt, const RegoalContext* regoal = nullptr);

/// True when the pedestrian is on its final waypoint within the pop radius.
bool at_final_waypoint(const Pedestrian& ped);

/// Samples distinct spawn anchors and a reachable goal for each pedestrian.
/// Anchors within clearance of an `exclusions` circle are not used as spawn
/// points. Throws ConfigError when the request cannot be met.
std::vector<Pedestrian> spawn_crowd(const Scene& scene, const CrowdConfig& config, const OccupancyGrid& grid,
                                    Rng& stream, std::uint64_t regoal_seed,
                                    std::span<const AgentCircle> exclusions = {});

}  // namespace socnav
