#include "socnav/world.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "socnav/kernels.hpp"
#include "socnav/kinematics.hpp"
#include "socnav/scene.hpp"

namespace socnav {

std::string_view to_string(ContactKind kind) {
  return kind == ContactKind::pedestrian ? "pedestrian" : "static";
}

ContactKind contact_kind_from_string(std::string_view s) {
  if (s == "pedestrian") return ContactKind::pedestrian;
  if (s == "static") return ContactKind::static_object;
  throw std::invalid_argument("unknown contact kind '" + std::string(s) + "'");
}

namespace {

bool entry_less(ContactKind ka, int ia, ContactKind kb, int ib) {
  if (ka != kb) return ka < kb;
  return ia < ib;
}

}  // namespace

bool CollisionLatch::contains(ContactKind kind, int id) const {
  return std::any_of(latched.begin(), latched.end(), [&](const Entry& e) { return e.kind == kind && e.other_id == id; });
}

int CollisionLatch::update(const std::vector<ContactEvent>& samples) {
  std::vector<Entry> next;
  int events = 0;
  for (const auto& s : samples) {
    const bool was = contains(s.kind, s.other_id);
    if (s.gap < 0.0) {
      if (!was) {
        ++events;
        (s.kind == ContactKind::pedestrian ? ped_collisions : static_collisions) += 1;
      }
      next.push_back({s.kind, s.other_id});
    } else if (was && s.gap <= kCollisionRearmGap) {
      next.push_back({s.kind, s.other_id});
    }
  }
  std::sort(next.begin(), next.end(),
            [](const Entry& a, const Entry& b) { return entry_less(a.kind, a.other_id, b.kind, b.other_id); });
  next.erase(std::unique(next.begin(), next.end()), next.end());
  latched = std::move(next);
  return events;
}

double contact_gap(const WorldState& world, const Scene& scene, ContactKind kind, int other_id) {
  const Vec2 p = world.robot.pose.position();
  const double r = world.robot.spec.footprint_radius;
  if (kind == ContactKind::pedestrian) {
    for (const auto& ped : world.pedestrians) {
      if (ped.id == other_id) return distance(p, ped.pose.position()) - r - ped.radius;
    }
    throw std::out_of_range("no pedestrian with id " + std::to_string(other_id));
  }
  if (other_id == kBoundsId) return scene.bounds.interior_clearance(p) - r;
  return signed_distance_to_polygon(p, scene.obstacles.at(static_cast<std::size_t>(other_id))) - r;
}

std::vector<ContactEvent> detect_collisions(const WorldState& world, const Scene& scene) {
  std::vector<ContactEvent> out;
  for (const auto& ped : world.pedestrians) {
    const double gap = contact_gap(world, scene, ContactKind::pedestrian, ped.id);
    if (gap < 0.0) out.push_back({ContactKind::pedestrian, ped.id, gap});
  }
  const double bounds_gap = contact_gap(world, scene, ContactKind::static_object, kBoundsId);
  if (bounds_gap < 0.0) out.push_back({ContactKind::static_object, kBoundsId, bounds_gap});
  for (int k = 0; k < static_cast<int>(scene.obstacles.size()); ++k) {
    const double gap = contact_gap(world, scene, ContactKind::static_object, k);
    if (gap < 0.0) out.push_back({ContactKind::static_object, k, gap});
  }
  return out;
}

std::vector<ContactEvent> contact_samples(const WorldState& world, const Scene& scene) {
  auto out = detect_collisions(world, scene);
  for (const auto& e : world.collisions.latched) {
    const bool present = std::any_of(out.begin(), out.end(),
                                     [&](const ContactEvent& c) { return c.kind == e.kind && c.other_id == e.other_id; });
    if (!present) out.push_back({e.kind, e.other_id, contact_gap(world, scene, e.kind, e.other_id)});
  }
  std::sort(out.begin(), out.end(), [](const ContactEvent& a, const ContactEvent& b) {
    return entry_less(a.kind, a.other_id, b.kind, b.other_id);
  });
  return out;
}

StepResult step(const WorldState& world, const SimEnvironment& env, const Twist& robot_cmd) {
  const Scene& scene = *env.scene;
  StepResult result{world, {}, {}};
  WorldState& next = result.world;

  // (1) clamp and (2) integrate the robot.
  result.applied = clamp_twist(robot_cmd, world.robot.twist, world.robot.spec, world.dt);
  next.robot.twist = result.applied;
  next.robot.pose = integrate_unicycle(world.robot.pose, result.applied, world.dt);

  // (3) forces from the pre-step snapshot, (4) integrate in id order.
  if (!world.pedestrians.empty()) {
    const auto forces = compute_forces(world.pedestrians, world.robot_circle(), scene, env.social_force);
    RegoalContext regoal{&scene, env.ped_grid};
    const RegoalContext* ctx = env.regoal && env.ped_grid != nullptr ? &regoal : nullptr;
    for (std::size_t i = 0; i < next.pedestrians.size(); ++i) {
      next.pedestrians[i] = step_pedestrian(std::move(next.pedestrians[i]), forces[i], world.dt, ctx);
    }
  }

  // (5) contacts and (6) debounce.
  result.contacts = contact_samples(next, scene);
  next.collisions.update(result.contacts);

  // (7)
  next.tick = world.tick + 1;
  return result;
}

}  // namespace socnav
