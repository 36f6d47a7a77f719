#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "socnav/crowd.hpp"
#include "socnav/geometry.hpp"
#include "socnav/occupancy.hpp"
#include "socnav/robot.hpp"

namespace socnav {

struct Scene;

inline constexpr double kDefaultDt = 0.05;

enum class ContactKind { pedestrian, static_object };

std::string_view to_string(ContactKind kind);
ContactKind contact_kind_from_string(std::string_view s);

/// Scene bounds are reported as a static contact with this id.
inline constexpr int kBoundsId = -1;

/// One robot contact pair. `gap` is the signed surface distance: negative
/// while overlapping.
struct ContactEvent {
  ContactKind kind = ContactKind::pedestrian;
  int other_id = 0;
  double gap = 0.0;

  bool operator==(const ContactEvent&) const = default;
};

/// Separation that re-arms a latched contact pair.
inline constexpr double kCollisionRearmGap = 0.05;

/// Debounce latch: a pair counts once per continuous contact and re-arms
/// only after its gap exceeds kCollisionRearmGap.
struct CollisionLatch {
  struct Entry {
    ContactKind kind;
    int other_id;
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> latched;  // sorted by (kind, other_id)
  std::int64_t ped_collisions = 0;
  std::int64_t static_collisions = 0;

  bool contains(ContactKind kind, int id) const;
  /// Feeds one tick of samples. Every latched pair must be present.
  /// Returns the number of new collision events.
  int update(const std::vector<ContactEvent>& samples);

  bool operator==(const CollisionLatch&) const = default;
};

struct RobotState {
  Pose2D pose;
  Twist twist;
  RobotSpec spec;
  bool operator==(const RobotState&) const = default;
};

struct WorldState {
  std::int64_t tick = 0;
  double dt = kDefaultDt;
  RobotState robot;
  std::vector<Pedestrian> pedestrians;  // ordered by id
  CollisionLatch collisions;

  double sim_time() const { return static_cast<double>(tick) * dt; }
  AgentCircle robot_circle() const { return {robot.pose.position(), robot.spec.footprint_radius}; }
  bool operator==(const WorldState&) const = default;
};

/// Everything static a world step needs besides the scene geometry.
struct SimEnvironment {
  const Scene* scene = nullptr;
  /// Scene rasterized with pedestrian-radius inflation; used for regoal.
  const OccupancyGrid* ped_grid = nullptr;
  SocialForceParams social_force;
  bool regoal = false;
};

/// Overlapping robot pairs: pedestrians by circle overlap, static objects
/// by distance to polygon or leaving the bounds. Sorted by (kind, id).
std::vector<ContactEvent> detect_collisions(const WorldState& world, const Scene& scene);

/// Gap between the robot and one contact partner.
double contact_gap(const WorldState& world, const Scene& scene, ContactKind kind, int other_id);

/// Overlapping pairs plus any latched pair, each with its current gap.
std::vector<ContactEvent> contact_samples(const WorldState& world, const Scene& scene);

struct StepResult {
  WorldState world;
  std::vector<ContactEvent> contacts;  // samples fed to the latch this tick
  Twist applied;                       // command after clamping
};

/// Advances one tick in fixed order: clamp, integrate robot, pedestrian
/// forces from the pre-step snapshot, integrate pedestrians by id, detect
/// contacts, update latch, increment tick.
StepResult step(const WorldState& world, const SimEnvironment& env, const Twist& robot_cmd);

/// Tag identifying the step ordering above; part of every record.
inline constexpr std::string_view kStepOrderVersion = "step-v1";

}  // namespace socnav
