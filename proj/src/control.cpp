#include "socnav/control.hpp"

#include <algorithm>
#include <cmath>

#include "socnav/planner.hpp"
#include "socnav/scene.hpp"

namespace socnav {

BaselineGrids make_baseline_grids(const Scene& scene, const RobotSpec& robot, const BaselineParams& params) {
  BaselineGrids grids;
  for (double margin : params.clearance_margins) {
    grids.levels.push_back(rasterize_occupancy(scene, robot.footprint_radius + margin));
  }
  return grids;
}

double forward_sector_min(const Observation& obs, const ScanSpec& spec, double half_angle) {
  double best = spec.r_max;
  for (int k = 0; k < static_cast<int>(obs.scan.size()); ++k) {
    if (std::abs(normalize_angle(spec.beam_angle(k))) <= half_angle) best = std::min(best, obs.scan[k]);
  }
  return best;
}

namespace {

bool replan(const Observation& obs, const BaselineGrids& grids, BaselineMemory& memory) {
  memory.last_plan_tick = obs.tick;
  memory.segment = 0;
  for (const OccupancyGrid& grid : grids.levels) {
    try {
      memory.path = plan_waypoints_snapped(grid, obs.pose.position(), obs.goal.position());
      memory.has_plan = true;
      return true;
    } catch (const NoPathError&) {
    }
  }
  memory.path.clear();
  memory.has_plan = false;
  return false;
}

/// Point `lookahead` meters along the path beyond the projection of p.
Vec2 lookahead_point(BaselineMemory& memory, Vec2 p, double lookahead) {
  const auto& path = memory.path;
  if (path.size() == 1) return path.front();
  // Advance one segment at a time; jumping to any nearer segment skips
  // corners when the path doubles back around an obstacle.
  while (memory.segment + 2 < path.size()) {
    const std::size_t s = memory.segment;
    const double here = distance(p, closest_point_on_segment(p, path[s], path[s + 1]));
    const double next = distance(p, closest_point_on_segment(p, path[s + 1], path[s + 2]));
    if (next > here) break;
    memory.segment = s + 1;
  }
  Vec2 from = closest_point_on_segment(p, path[memory.segment], path[memory.segment + 1]);
  double remaining = lookahead;
  for (std::size_t s = memory.segment; s + 1 < path.size(); ++s) {
    const Vec2 to = path[s + 1];
    const double len = distance(from, to);
    if (len >= remaining) return from + (to - from) * (remaining / len);
    remaining -= len;
    from = to;
  }
  return path.back();
}

}  // namespace

ControllerDecision baseline_decide(const Observation& obs, const BaselineGrids& grids, BaselineMemory& memory,
                                   const EpisodeStart& episode, const BaselineParams& params) {
  const Vec2 p = obs.pose.position();
  const double to_goal = distance(p, obs.goal.position());
  if (to_goal <= episode.goal_tolerance) return {{0.0, 0.0}, true};

  if (memory.last_plan_tick < 0 || to_goal < memory.best_distance - params.progress_epsilon) {
    memory.best_distance = to_goal;
    memory.last_progress_tick = obs.tick;
  }
  const auto period = static_cast<std::int64_t>(std::llround(params.replan_period / episode.dt));
  const auto window = static_cast<std::int64_t>(std::llround(params.progress_window / episode.dt));
  const bool due = memory.last_plan_tick < 0 || obs.tick - memory.last_plan_tick >= period;
  const bool stalled = obs.tick - memory.last_progress_tick >= window && obs.tick - memory.last_plan_tick >= window;
  if (due || stalled) {
    if (stalled) {
      memory.last_progress_tick = obs.tick;
      memory.best_distance = to_goal;
    }
    replan(obs, grids, memory);
  }
  if (!memory.has_plan) return {{0.0, 0.0}, false};

  const Vec2 target = to_goal <= params.lookahead ? obs.goal.position() : lookahead_point(memory, p, params.lookahead);
  const Vec2 d = target - p;
  const double heading_error = normalize_angle(std::atan2(d.y, d.x) - obs.pose.theta);

  Twist cmd;
  cmd.w = std::clamp(params.heading_gain * heading_error, -episode.robot.w_max, episode.robot.w_max);
  // The heading loop settles in about 1/gain seconds; going faster than one
  // lookahead per settling time overshoots corners.
  const double v_track = std::min(episode.robot.v_max, params.lookahead * params.heading_gain);
  cmd.v = v_track * std::max(0.0, std::cos(heading_error));

  const double ahead = forward_sector_min(obs, episode.scan, params.sector_half_angle);
  if (ahead < params.stop_range) {
    cmd.v = 0.0;
  } else if (ahead < params.slow_range) {
    cmd.v *= (ahead - params.stop_range) / (params.slow_range - params.stop_range);
  }
  return {cmd, false};
}

void BaselineController::begin_episode(const EpisodeStart& start) {
  episode_ = start;
  memory_ = BaselineMemory{};
  // Grids depend only on (scene, footprint); reuse across episodes.
  const std::string key = start.scene->name + "/" + start.robot.name;
  if (!grids_ || key != grids_key_) {
    grids_ = std::make_shared<const BaselineGrids>(make_baseline_grids(*start.scene, start.robot, params_));
    grids_key_ = key;
  }
}

ControllerDecision BaselineController::decide(const Observation& obs) {
  return baseline_decide(obs, *grids_, memory_, episode_, params_);
}

ControllerDecision teleop_decide(const std::optional<Twist>& latest_cmd, std::int64_t staleness) {
  if (!latest_cmd || staleness > kDeadManTicks) return {{0.0, 0.0}, false};
  return {*latest_cmd, false};
}

void CommandCell::put(const Twist& cmd) {
  std::lock_guard lock(mutex_);
  cmd_ = cmd;
  ++serial_;
}

void CommandCell::clear() {
  std::lock_guard lock(mutex_);
  cmd_.reset();
  ++serial_;
}

std::pair<std::optional<Twist>, std::uint64_t> CommandCell::get() const {
  std::lock_guard lock(mutex_);
  return {cmd_, serial_};
}

void TeleopController::begin_episode(const EpisodeStart&) {
  // Ticks restart at zero; a command left over from the last episode is stale.
  seen_tick_ = -(kDeadManTicks + 1);
}

ControllerDecision TeleopController::decide(const Observation& obs) {
  const auto [cmd, serial] = cell_->get();
  if (serial != seen_serial_) {
    seen_serial_ = serial;
    seen_tick_ = obs.tick;
  }
  return teleop_decide(cmd, obs.tick - seen_tick_);
}

}  // namespace socnav
