#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "socnav/control.hpp"
#include "socnav/crowd.hpp"
#include "socnav/errors.hpp"
#include "socnav/metrics.hpp"
#include "socnav/occupancy.hpp"
#include "socnav/robot.hpp"
#include "socnav/scene.hpp"
#include "socnav/sensing.hpp"
#include "socnav/serialization.hpp"
#include "socnav/world.hpp"

namespace socnav {

/// Engine identifier written into every record. Replay refuses records
/// from a different engine.
std::string engine_version();

enum class ControllerKind { builtin, teleop, external, idle };

std::string_view to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(std::string_view s);

/// Pedestrians per episode when a trial does not say.
inline constexpr int kDefaultPedCount = 8;

struct TrialConfig {
  std::string scene = "lab";
  std::string robot = "jackal";
  ControllerKind controller = ControllerKind::builtin;
  int episodes = 10;
  std::uint64_t master_seed = 0;
  CrowdConfig crowd = [] {
    CrowdConfig c;
    c.count = kDefaultPedCount;
    return c;
  }();
  double timeout = 120.0;
  double goal_tolerance = 0.5;
  double dt = kDefaultDt;
  ScanSpec scan;
};

/// Checks numeric invariants that do not need the scene.
void validate_trial_config(const TrialConfig& config);
Json trial_config_to_json(const TrialConfig& config);
/// Missing fields keep their defaults. Throws ConfigError.
TrialConfig trial_config_from_json(const Json& j);
TrialConfig load_trial_config(const std::filesystem::path& path);

/// The complete recorded initial condition of one episode.
struct EpisodeConfig {
  std::int64_t episode_id = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t episode_seed = 0;
  std::string scene;
  std::string scene_digest;
  RobotSpec robot;
  Pose2D robot_start;
  Pose2D robot_goal;
  int start_anchor = -1;
  int goal_anchor = -1;
  CrowdConfig crowd;
  std::vector<Pedestrian> pedestrians;
  SocialForceParams social_force;
  double dt = kDefaultDt;
  double timeout = 120.0;
  double goal_tolerance = 0.5;
  ScanSpec scan;

  bool operator==(const EpisodeConfig&) const = default;
};

Json episode_config_to_json(const EpisodeConfig& c);
EpisodeConfig episode_config_from_json(const Json& j);
/// FNV-1a over the canonical serialization, as 16 hex digits.
std::string config_hash(const EpisodeConfig& c);

/// Digest of a scene's canonical serialization.
std::string scene_digest(const Scene& scene);

/// Scene plus the grids derived from it, built once per trial.
class SceneResources {
 public:
  explicit SceneResources(Scene scene);
  const Scene& scene() const { return scene_; }
  const std::string& digest() const { return digest_; }
  const OccupancyGrid& ped_grid() const { return ped_grid_; }
  const OccupancyGrid& robot_grid(const RobotSpec& robot);
  SocialForceParams social_force() const { return scene_.social_force.value_or(SocialForceParams{}); }

 private:
  Scene scene_;
  std::string digest_;
  OccupancyGrid ped_grid_;
  std::map<double, OccupancyGrid> robot_grids_;
};

/// Pure function of (config, index, master seed). Throws ConfigError when
/// no reachable robot start/goal pair turns up in 100 draws.
EpisodeConfig generate_episode(const TrialConfig& config, std::int64_t episode_index, std::uint64_t master_seed,
                               SceneResources& resources);

struct TickRecord {
  std::int64_t tick = 0;
  std::optional<Twist> cmd;  // requested command that produced this state
  Twist twist;               // applied command
  Pose2D pose;
  struct PedState {
    Pose2D pose;
    Vec2 velocity;
    bool operator==(const PedState&) const = default;
  };
  std::vector<PedState> peds;
  std::vector<ContactEvent> contacts;
  std::uint64_t chk = 0;  // chained digest over this and all earlier ticks

  bool operator==(const TickRecord&) const = default;
};

Json tick_to_json(const TickRecord& t);
TickRecord tick_from_json(const Json& j);

struct EpisodeRecord {
  EpisodeConfig config;
  std::string engine_version;
  std::vector<TickRecord> ticks;
  EpisodeMetrics metrics;
};

void write_record(const std::filesystem::path& path, const EpisodeRecord& record);
std::string record_to_string(const EpisodeRecord& record);
/// Throws ConfigError for unreadable or malformed files.
EpisodeRecord read_record(const std::filesystem::path& path);
/// Name of the first metric field whose bits differ ("metrics.elapsed"),
/// or empty when equal.
std::string metrics_difference(const EpisodeMetrics& got, const EpisodeMetrics& want);
EpisodeRecord parse_record(const std::string& text, const std::string& source = "<record>");

/// Center distance from the robot to the goal position.
double goal_distance(const Pose2D& pose, const Pose2D& goal);

/// Debounced (pedestrian, static) collision totals over per-tick samples.
std::pair<std::int64_t, std::int64_t> count_collisions(const std::vector<std::vector<ContactEvent>>& stream);

/// Builds tick-0 world state from a config.
WorldState initial_world(const EpisodeConfig& config);

EpisodeRecord run_episode(const EpisodeConfig& config, SceneResources& resources, Controller& controller);

/// Metrics recomputed from the tick log alone.
EpisodeMetrics metrics_from_ticks(const EpisodeRecord& record);

class ReplayMismatch : public std::runtime_error {
 public:
  ReplayMismatch(std::int64_t tick, std::string field);
  std::int64_t tick() const { return tick_; }
  const std::string& field() const { return field_; }

 private:
  std::int64_t tick_;
  std::string field_;
};

class IncompatibleRecord : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Re-simulates from the config feeding the recorded command stream. Throws
/// ReplayMismatch at the first divergence, IncompatibleRecord on version or
/// scene mismatch.
EpisodeMetrics replay(const EpisodeRecord& record, SceneResources& resources);
EpisodeMetrics replay(const EpisodeRecord& record);

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, n - 1
  int n = 0;
  bool operator==(const Aggregate&) const = default;
};

/// Mean and sample deviation; deviation 0 for a single value.
Aggregate aggregate_values(const std::vector<double>& values);

struct TrialReport {
  std::string scene;
  std::string robot;
  std::string controller;
  std::vector<std::int64_t> episode_ids;
  std::vector<EpisodeMetrics> rows;
  int n = 0;        // non-aborted episodes
  int aborted = 0;
  int completed = 0;
  int completion_rate = 0;  // integer percent
  std::optional<Aggregate> elapsed;
  std::optional<Aggregate> final_distance;
  std::optional<Aggregate> min_ped_distance;
  std::optional<Aggregate> collisions;  // pedestrian + static
  std::optional<Aggregate> ped_collisions;
  std::optional<Aggregate> static_collisions;

  bool operator==(const TrialReport&) const = default;
};

/// Aborted rows are kept but excluded from every aggregate.
TrialReport aggregate(const std::vector<EpisodeMetrics>& rows);

/// Column header of the results table.
inline constexpr std::string_view kTableHeader = "Elapsed (sec.) | Complete | Final Dist (m) | Ped. Dist (m) | Collisions";

std::string render_table(const TrialReport& report);
std::string render_tsv(const TrialReport& report);
/// Parses render_tsv output (rows and stored aggregate).
TrialReport parse_tsv(const std::string& text);
/// Recomputes aggregates from a report's rows, keeping its labels.
TrialReport reaggregate(const TrialReport& report);

struct TrialResult {
  TrialReport report;
  std::vector<EpisodeRecord> records;
};

struct TrialHooks {
  /// Called after each episode finishes, before the next one starts.
  std::function<void(const EpisodeRecord&)> on_episode;
  /// Polled before each episode; returning true marks the rest aborted.
  std::function<bool()> stop_requested;
};

TrialResult run_trial(const TrialConfig& config, Controller& controller, SceneResources& resources,
                      const TrialHooks& hooks = {});

/// Writes records/episode_NNNN.jsonl, report.tsv and report.txt.
void write_trial_outputs(const std::filesystem::path& out_dir, const TrialResult& result);
std::filesystem::path record_path(const std::filesystem::path& out_dir, std::int64_t episode_id);
void write_report_files(const std::filesystem::path& out_dir, const TrialReport& report);

/// Controller for kinds that run in-process (builtin, idle).
std::unique_ptr<Controller> make_local_controller(ControllerKind kind);

}  // namespace socnav
