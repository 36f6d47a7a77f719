#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "socnav/geometry.hpp"
#include "socnav/metrics.hpp"
#include "socnav/occupancy.hpp"
#include "socnav/robot.hpp"
#include "socnav/sensing.hpp"

namespace socnav {

struct WorldState;

struct Scene;

struct ControllerDecision {
  Twist twist;
  /// Controller believes the goal is reached. Advisory; the runner decides.
  bool done_hint = false;
};

/// What a controller learns at the start of an episode.
struct EpisodeStart {
  std::int64_t episode_id = 0;
  const Scene* scene = nullptr;
  RobotSpec robot;
  Pose2D start;
  Pose2D goal;
  double goal_tolerance = 0.5;
  double dt = 0.05;
  ScanSpec scan;
  std::string config_hash;
};

/// Thrown by a controller that can no longer produce decisions. The runner
/// records the episode as aborted with `reason`.
class ControllerAborted : public std::runtime_error {
 public:
  ControllerAborted(std::string reason, const std::string& what)
      : std::runtime_error(what), reason_(std::move(reason)) {}
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

/// Called once per tick with the latest observation.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void begin_episode(const EpisodeStart&) {}
  /// Ground-truth state for viewers, called right before decide. Decisions
  /// must depend on the observation only.
  virtual void observe_world(const WorldState&) {}
  virtual ControllerDecision decide(const Observation& obs) = 0;
  virtual void end_episode(std::int64_t /*episode_id*/, const EpisodeMetrics&) {}
};

/// Always commands zero velocity.
class IdleController final : public Controller {
 public:
  ControllerDecision decide(const Observation&) override { return {}; }
};

struct BaselineParams {
  double replan_period = 2.0;   // s
  double lookahead = 1.0;       // m
  double slow_range = 1.5;      // m
  double stop_range = 0.6;      // m
  double sector_half_angle = 0.5235987755982988;  // 30 deg
  double heading_gain = 2.5;    // 1/s
  // Margins added to the footprint, tried widest first; the last must be 0
  // so any footprint-feasible goal still gets a plan.
  std::vector<double> clearance_margins{0.35, 0.25, 0.15, 0.05, 0.0};
  double progress_window = 1.0;    // s
  double progress_epsilon = 0.1;   // m
};

/// Grids the baseline plans on, one per clearance margin.
struct BaselineGrids {
  std::vector<OccupancyGrid> levels;
};

BaselineGrids make_baseline_grids(const Scene& scene, const RobotSpec& robot, const BaselineParams& params);

/// Planner memory carried between ticks.
struct BaselineMemory {
  std::vector<Vec2> path;
  std::size_t segment = 0;
  std::int64_t last_plan_tick = -1;
  std::int64_t last_progress_tick = 0;
  double best_distance = 0.0;
  bool has_plan = false;
};

/// Scan minimum over beams within +-half_angle of the heading.
double forward_sector_min(const Observation& obs, const ScanSpec& spec, double half_angle);

/// Global grid plan plus pure pursuit with obstacle slow-down.
ControllerDecision baseline_decide(const Observation& obs, const BaselineGrids& grids, BaselineMemory& memory,
                                   const EpisodeStart& episode, const BaselineParams& params = {});

class BaselineController final : public Controller {
 public:
  explicit BaselineController(BaselineParams params = {}) : params_(params) {}
  void begin_episode(const EpisodeStart& start) override;
  ControllerDecision decide(const Observation& obs) override;

 private:
  BaselineParams params_;
  EpisodeStart episode_;
  std::shared_ptr<const BaselineGrids> grids_;
  std::string grids_key_;
  BaselineMemory memory_;
};

/// Ticks after which a teleoperation command is considered stale.
inline constexpr std::int64_t kDeadManTicks = 10;

/// Latest human command, or zero when absent or stale.
ControllerDecision teleop_decide(const std::optional<Twist>& latest_cmd, std::int64_t staleness);

/// Single-slot command cell written by the transport, read by the stepper.
class CommandCell {
 public:
  void put(const Twist& cmd);
  void clear();
  /// Command and its arrival counter (incremented on every put).
  std::pair<std::optional<Twist>, std::uint64_t> get() const;

 private:
  mutable std::mutex mutex_;
  std::optional<Twist> cmd_;
  std::uint64_t serial_ = 0;
};

/// Feeds teleop_decide from a CommandCell, measuring staleness in ticks
/// since the current command was first seen.
class TeleopController : public Controller {
 public:
  explicit TeleopController(std::shared_ptr<CommandCell> cell) : cell_(std::move(cell)) {}
  void begin_episode(const EpisodeStart&) override;
  ControllerDecision decide(const Observation& obs) override;

 private:
  std::shared_ptr<CommandCell> cell_;
  std::uint64_t seen_serial_ = 0;
  std::int64_t seen_tick_ = 0;
};

}  // namespace socnav
