#include "socnav/crowd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "socnav/errors.hpp"
#include "socnav/planner.hpp"
#include "socnav/scene.hpp"

namespace socnav {

Vec2 coincident_direction(int id_a, int id_b) {
  const int lo = std::min(id_a, id_b);
  const int hi = std::max(id_a, id_b);
  const std::uint64_t h = mix64((static_cast<std::uint64_t>(static_cast<std::uint32_t>(lo)) << 32) |
                                static_cast<std::uint32_t>(hi));
  const double angle = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 * std::numbers::pi;
  const Vec2 u{std::cos(angle), std::sin(angle)};
  return id_a <= id_b ? u : u * -1.0;
}

namespace {

// Robot id for coincident-direction hashing.
constexpr int kRobotId = -1;

Vec2 agent_repulsion(Vec2 self, double r_self, int self_id, Vec2 other, double r_other, int other_id,
                     const SocialForceParams& params) {
  const Vec2 diff = self - other;
  const double d = diff.norm();
  const Vec2 n = d > 0.0 ? diff * (1.0 / d) : coincident_direction(self_id, other_id);
  const double mag = std::min(kMaxRepulsion, params.A * std::exp((r_self + r_other - d) / params.B));
  return n * mag;
}

/// Nearest static geometry as (signed clearance, unit normal pointing away).
std::pair<double, Vec2> nearest_static(const Scene& scene, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  Vec2 normal{0.0, 0.0};

  const Bounds& b = scene.bounds;
  const std::pair<double, Vec2> walls[4] = {
      {p.x - b.min_x, {1.0, 0.0}}, {b.max_x - p.x, {-1.0, 0.0}}, {p.y - b.min_y, {0.0, 1.0}}, {b.max_y - p.y, {0.0, -1.0}}};
  for (const auto& [d, n] : walls) {
    if (d < best) {
      best = d;
      normal = n;
    }
  }

  for (const auto& poly : scene.obstacles) {
    const bool inside = point_in_polygon(p, poly);
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
      const Vec2 a = poly[i];
      const Vec2 c = closest_point_on_segment(p, a, poly[(i + 1) % n]);
      const double dist = distance(p, c);
      const double signed_d = inside ? -dist : dist;
      if (signed_d < best) {
        best = signed_d;
        if (dist > 0.0) {
          normal = (inside ? c - p : p - c) * (1.0 / dist);
        } else {
          // On the boundary: outward edge normal of a counter-clockwise polygon.
          const Vec2 e = poly[(i + 1) % n] - a;
          const double len = e.norm();
          normal = len > 0.0 ? Vec2{e.y / len, -e.x / len} : Vec2{1.0, 0.0};
        }
      }
    }
  }
  return {best, normal};
}

Vec2 driving_term(const Pedestrian& ped, const SocialForceParams& params) {
  Vec2 e{0.0, 0.0};
  if (!ped.waypoints.empty() && !at_final_waypoint(ped)) {
    const Vec2 to = ped.waypoints.front() - ped.pose.position();
    const double d = to.norm();
    if (d > 0.0) e = to * (1.0 / d);
  }
  return (e * ped.desired_speed - ped.velocity) * (1.0 / params.tau);
}

Vec2 static_term(const Pedestrian& ped, const Scene& scene, const SocialForceParams& params) {
  const auto [d, n] = nearest_static(scene, ped.pose.position());
  const double mag = std::min(kMaxRepulsion, params.A_obs * std::exp((ped.radius - d) / params.B_obs));
  return n * mag;
}

}  // namespace

bool at_final_waypoint(const Pedestrian& ped) {
  return ped.waypoints.size() == 1 && distance(ped.pose.position(), ped.waypoints.front()) <= kWaypointPopRadius;
}

Vec2 social_force_in_crowd(const Pedestrian& ped, std::span<const Pedestrian> all, const AgentCircle& robot,
                           const Scene& scene, const SocialForceParams& params) {
  const Vec2 p = ped.pose.position();
  Vec2 f = driving_term(ped, params);
  for (const auto& other : all) {
    if (other.id == ped.id) continue;
    f += agent_repulsion(p, ped.radius, ped.id, other.pose.position(), other.radius, other.id, params);
  }
  f += agent_repulsion(p, ped.radius, ped.id, robot.position, robot.radius, kRobotId, params);
  f += static_term(ped, scene, params);
  return f;
}

Vec2 social_force(const Pedestrian& ped, std::span<const Pedestrian> others, const AgentCircle& robot,
                  const Scene& scene, const SocialForceParams& params) {
  return social_force_in_crowd(ped, others, robot, scene, params);
}

namespace {

bool try_regoal(Pedestrian& ped, const RegoalContext& ctx) {
  const auto& anchors = ctx.scene->ped_anchors;
  if (anchors.size() < 2) return false;
  Rng rng(ped.rng_state);
  bool ok = false;
  for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
    auto pick = static_cast<int>(rng.below(anchors.size() - 1));
    if (pick >= ped.goal_anchor && ped.goal_anchor >= 0) ++pick;
    try {
      auto path = plan_waypoints_snapped(*ctx.grid, ped.pose.position(), anchors[pick].position());
      path.erase(path.begin());
      if (path.empty()) continue;
      ped.waypoints = std::move(path);
      ped.goal = anchors[pick];
      ped.goal_anchor = pick;
      ok = true;
    } catch (const NoPathError&) {
    }
  }
  ped.rng_state = rng.state();
  return ok;
}

}  // namespace

Pedestrian step_pedestrian(Pedestrian ped, Vec2 force, double dt, const RegoalContext* regoal) {
  ped.velocity += force * dt;
  const double cap = kSpeedCapFactor * ped.desired_speed;
  const double speed = ped.velocity.norm();
  if (speed > cap) ped.velocity = ped.velocity * (cap / speed);
  ped.pose.x += ped.velocity.x * dt;
  ped.pose.y += ped.velocity.y * dt;
  if (ped.velocity.norm() > kHeadingSpeedThreshold) {
    ped.pose.theta = normalize_angle(std::atan2(ped.velocity.y, ped.velocity.x));
  }

  while (ped.waypoints.size() > 1 && distance(ped.pose.position(), ped.waypoints.front()) <= kWaypointPopRadius) {
    ped.waypoints.erase(ped.waypoints.begin());
  }
  if (regoal != nullptr && at_final_waypoint(ped)) try_regoal(ped, *regoal);
  return ped;
}

std::vector<Pedestrian> spawn_crowd(const Scene& scene, const CrowdConfig& config, const OccupancyGrid& grid,
                                    Rng& stream, std::uint64_t regoal_seed,
                                    std::span<const AgentCircle> exclusions) {
  if (config.count < 0) throw ConfigError("crowd.count must be >= 0");
  if (!(config.desired_speed_range.min > 0.0) || config.desired_speed_range.min > config.desired_speed_range.max) {
    throw ConfigError("crowd.speed_range must satisfy 0 < min <= max");
  }
  if (config.count == 0) return {};

  constexpr double kSpawnMargin = 0.5;
  std::vector<int> eligible;
  for (int i = 0; i < static_cast<int>(scene.ped_anchors.size()); ++i) {
    const Vec2 p = scene.ped_anchors[i].position();
    const bool blocked = std::any_of(exclusions.begin(), exclusions.end(), [&](const AgentCircle& c) {
      return distance(p, c.position) < c.radius + kPedestrianRadius + kSpawnMargin;
    });
    if (!blocked) eligible.push_back(i);
  }
  if (config.count > static_cast<int>(eligible.size())) {
    throw ConfigError("crowd.count " + std::to_string(config.count) + " exceeds the " +
                      std::to_string(eligible.size()) + " usable pedestrian anchors of scene '" + scene.name + "'");
  }

  // Partial Fisher-Yates: the first `count` entries become spawn anchors.
  for (int i = 0; i < config.count; ++i) {
    const auto j = i + static_cast<int>(stream.below(eligible.size() - i));
    std::swap(eligible[i], eligible[j]);
  }

  std::vector<Pedestrian> crowd;
  crowd.reserve(config.count);
  const int n_anchors = static_cast<int>(scene.ped_anchors.size());
  for (int id = 0; id < config.count; ++id) {
    Pedestrian ped;
    ped.id = id;
    const int spawn = eligible[id];
    ped.pose = scene.ped_anchors[spawn];
    ped.desired_speed = stream.uniform(config.desired_speed_range.min, config.desired_speed_range.max);
    ped.rng_state = mix64(regoal_seed ^ mix64(static_cast<std::uint64_t>(id)));

    bool planned = false;
    for (int attempt = 0; attempt < 32 && !planned; ++attempt) {
      auto goal = static_cast<int>(stream.below(n_anchors - 1));
      if (goal >= spawn) ++goal;
      try {
        auto path = plan_waypoints(grid, ped.pose.position(), scene.ped_anchors[goal].position());
        path.erase(path.begin());
        ped.waypoints = std::move(path);
        ped.goal = scene.ped_anchors[goal];
        ped.goal_anchor = goal;
        planned = true;
      } catch (const NoPathError&) {
      }
    }
    if (!planned) {
      throw ConfigError("scene '" + scene.name + "': no reachable goal from ped_anchors[" + std::to_string(spawn) + "]");
    }
    const Vec2 to = ped.waypoints.front() - ped.pose.position();
    ped.pose.theta = normalize_angle(std::atan2(to.y, to.x));
    crowd.push_back(std::move(ped));
  }
  return crowd;
}

}  // namespace socnav
