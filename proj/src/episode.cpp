#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "socnav/errors.hpp"
#include "socnav/planner.hpp"
#include "socnav/rng.hpp"
#include "socnav/trial.hpp"

namespace socnav {

SceneResources::SceneResources(Scene scene)
    : scene_(std::move(scene)), digest_(scene_digest(scene_)), ped_grid_(rasterize_occupancy(scene_, kPedestrianRadius)) {}

const OccupancyGrid& SceneResources::robot_grid(const RobotSpec& robot) {
  auto it = robot_grids_.find(robot.footprint_radius);
  if (it == robot_grids_.end()) {
    it = robot_grids_.emplace(robot.footprint_radius, rasterize_occupancy(scene_, robot.footprint_radius)).first;
  }
  return it->second;
}

double goal_distance(const Pose2D& pose, const Pose2D& goal) { return distance(pose.position(), goal.position()); }

EpisodeConfig generate_episode(const TrialConfig& config, std::int64_t episode_index, std::uint64_t master_seed,
                               SceneResources& resources) {
  const Scene& scene = resources.scene();
  const std::optional<RobotSpec> robot = require_robot(config.robot);
  const auto n_anchors = scene.robot_anchors.size();
  if (n_anchors < 2) throw ConfigError("scene '" + scene.name + "' needs at least two robot anchors");

  EpisodeConfig ep;
  ep.episode_id = episode_index;
  ep.master_seed = master_seed;
  ep.episode_seed = episode_seed(master_seed, static_cast<std::uint64_t>(episode_index));
  ep.scene = scene.name;
  ep.scene_digest = resources.digest();
  ep.robot = *robot;
  ep.crowd = config.crowd;
  ep.social_force = resources.social_force();
  ep.dt = config.dt;
  ep.timeout = config.timeout;
  ep.goal_tolerance = config.goal_tolerance;
  ep.scan = config.scan;

  Rng robot_rng(stream_seed(ep.episode_seed, "robot_spawn"));
  const OccupancyGrid& grid = resources.robot_grid(*robot);
  bool found = false;
  for (int attempt = 0; attempt < 100 && !found; ++attempt) {
    const auto s = static_cast<int>(robot_rng.below(n_anchors));
    auto g = static_cast<int>(robot_rng.below(n_anchors - 1));
    if (g >= s) ++g;
    const Pose2D& start = scene.robot_anchors[s];
    const Pose2D& goal = scene.robot_anchors[g];
    if (goal_distance(start, goal) <= config.goal_tolerance) continue;
    try {
      plan_waypoints_snapped(grid, start.position(), goal.position());
    } catch (const NoPathError&) {
      continue;
    }
    ep.robot_start = start;
    ep.robot_goal = goal;
    ep.start_anchor = s;
    ep.goal_anchor = g;
    found = true;
  }
  if (!found) {
    throw ConfigError("scene '" + scene.name + "': no reachable robot start/goal pair for '" + robot->name +
                      "' after 100 draws");
  }

  Rng crowd_rng(stream_seed(ep.episode_seed, "crowd_spawn"));
  const AgentCircle robot_circle{ep.robot_start.position(), robot->footprint_radius};
  ep.pedestrians = spawn_crowd(scene, config.crowd, resources.ped_grid(), crowd_rng,
                               stream_seed(ep.episode_seed, "crowd_regoal"), std::span(&robot_circle, 1));
  return ep;
}

WorldState initial_world(const EpisodeConfig& config) {
  WorldState w;
  w.tick = 0;
  w.dt = config.dt;
  w.robot.pose = config.robot_start;
  w.robot.spec = config.robot;
  w.pedestrians = config.pedestrians;
  return w;
}

// ---------------------------------------------------------------------------
// Tick log

Json tick_to_json(const TickRecord& t) {
  Json j = Json::object();
  j["tick"] = t.tick;
  j["cmd"] = t.cmd ? Json::array({t.cmd->v, t.cmd->w}) : Json(nullptr);
  j["twist"] = Json::array({t.twist.v, t.twist.w});
  j["pose"] = pose_to_json(t.pose);
  Json peds = Json::array();
  for (const auto& p : t.peds) peds.push_back(Json::array({p.pose.x, p.pose.y, p.pose.theta, p.velocity.x, p.velocity.y}));
  j["peds"] = std::move(peds);
  Json contacts = Json::array();
  for (const auto& c : t.contacts) contacts.push_back(contact_to_json(c));
  j["contacts"] = std::move(contacts);
  j["chk"] = hex64(t.chk);
  return j;
}

TickRecord tick_from_json(const Json& j) {
  TickRecord t;
  t.tick = integer_field(j, "tick");
  const Json& cmd = field(j, "cmd");
  if (!cmd.is_null()) {
    const Vec2 c = vec_from_json(cmd);
    t.cmd = Twist{c.x, c.y};
  }
  const Vec2 tw = vec_from_json(field(j, "twist"));
  t.twist = {tw.x, tw.y};
  t.pose = pose_from_json(field(j, "pose"));
  const Json& peds = field(j, "peds");
  if (!peds.is_array()) throw SchemaError("peds must be an array");
  for (const auto& p : peds) {
    if (!p.is_array() || p.size() != 5) throw SchemaError("ped state must be [x, y, theta, vx, vy]");
    t.peds.push_back({{as_number(p[0], "ped x"), as_number(p[1], "ped y"), as_number(p[2], "ped theta")},
                      {as_number(p[3], "ped vx"), as_number(p[4], "ped vy")}});
  }
  const Json& contacts = field(j, "contacts");
  if (!contacts.is_array()) throw SchemaError("contacts must be an array");
  for (const auto& c : contacts) t.contacts.push_back(contact_from_json(c));
  t.chk = parse_hex64(string_field(j, "chk"));
  return t;
}

namespace {

std::uint64_t tick_digest(const TickRecord& t, std::uint64_t previous) {
  Json j = tick_to_json(t);
  j.erase("chk");
  return fnv1a64(j.dump(), previous);
}

TickRecord snapshot(const WorldState& w, const std::optional<Twist>& cmd, std::vector<ContactEvent> contacts,
                    std::uint64_t previous_chk) {
  TickRecord t;
  t.tick = w.tick;
  t.cmd = cmd;
  t.twist = w.robot.twist;
  t.pose = w.robot.pose;
  t.peds.reserve(w.pedestrians.size());
  for (const auto& p : w.pedestrians) t.peds.push_back({p.pose, p.velocity});
  t.contacts = std::move(contacts);
  t.chk = tick_digest(t, previous_chk);
  return t;
}

/// Surface distance with the same arithmetic as nearest_pedestrian_distance.
double surface_distance(Vec2 robot, double r_robot, Vec2 ped, double r_ped) {
  return std::max(0.0, distance(robot, ped) - r_robot - r_ped);
}

/// The episode tick loop shared by run_episode and replay.
class EpisodeStepper {
 public:
  EpisodeStepper(const EpisodeConfig& config, SceneResources& resources)
      : config_(config),
        resources_(resources),
        env_{&resources.scene(), &resources.ped_grid(), config.social_force, config.crowd.regoal},
        world_(initial_world(config)),
        timeout_ticks_(std::llround(config.timeout / config.dt)) {
    auto contacts = contact_samples(world_, resources.scene());
    world_.collisions.update(contacts);
    track();
    ticks_.push_back(snapshot(world_, std::nullopt, std::move(contacts), fnv1a64(config_hash(config))));
  }

  const WorldState& world() const { return world_; }
  std::vector<TickRecord>& ticks() { return ticks_; }

  bool completed() const { return goal_distance(world_.robot.pose, config_.robot_goal) <= config_.goal_tolerance; }
  bool terminal() const { return completed() || world_.tick >= timeout_ticks_; }

  void advance(const Twist& cmd) {
    StepResult r = step(world_, env_, cmd);
    world_ = std::move(r.world);
    track();
    ticks_.push_back(snapshot(world_, cmd, std::move(r.contacts), ticks_.back().chk));
  }

  EpisodeMetrics finish(bool aborted, const std::string& reason) const {
    EpisodeMetrics m;
    m.final_distance = goal_distance(world_.robot.pose, config_.robot_goal);
    m.completed = !aborted && m.final_distance <= config_.goal_tolerance;
    if (m.completed || aborted) {
      m.elapsed = world_.sim_time();
    } else {
      m.elapsed = config_.timeout;
    }
    m.min_ped_distance = min_ped_;
    m.ped_collisions = world_.collisions.ped_collisions;
    m.static_collisions = world_.collisions.static_collisions;
    m.aborted = aborted;
    m.abort_reason = reason;
    return m;
  }

 private:
  void track() {
    const Vec2 p = world_.robot.pose.position();
    for (const auto& ped : world_.pedestrians) {
      const double d = surface_distance(p, world_.robot.spec.footprint_radius, ped.pose.position(), ped.radius);
      if (!min_ped_ || d < *min_ped_) min_ped_ = d;
    }
  }

  const EpisodeConfig& config_;
  SceneResources& resources_;
  SimEnvironment env_;
  WorldState world_;
  std::int64_t timeout_ticks_;
  std::optional<double> min_ped_;
  std::vector<TickRecord> ticks_;
};

EpisodeStart episode_start(const EpisodeConfig& config, const Scene& scene) {
  EpisodeStart s;
  s.episode_id = config.episode_id;
  s.scene = &scene;
  s.robot = config.robot;
  s.start = config.robot_start;
  s.goal = config.robot_goal;
  s.goal_tolerance = config.goal_tolerance;
  s.dt = config.dt;
  s.scan = config.scan;
  s.config_hash = config_hash(config);
  return s;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_bits(const Pose2D& a, const Pose2D& b) {
  return same_bits(a.x, b.x) && same_bits(a.y, b.y) && same_bits(a.theta, b.theta);
}

bool same_bits(const Twist& a, const Twist& b) { return same_bits(a.v, b.v) && same_bits(a.w, b.w); }

bool same_bits(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || same_bits(*a, *b);
}

/// Name of the first differing field, or empty when bit-identical.
std::string first_difference(const TickRecord& got, const TickRecord& want) {
  if (got.tick != want.tick) return "tick";
  if (got.cmd.has_value() != want.cmd.has_value()) return "cmd";
  if (!same_bits(got.twist, want.twist)) return "twist";
  if (!same_bits(got.pose, want.pose)) return "pose";
  if (got.peds.size() != want.peds.size()) return "peds";
  for (std::size_t i = 0; i < got.peds.size(); ++i) {
    const auto& g = got.peds[i];
    const auto& w = want.peds[i];
    if (!same_bits(g.pose, w.pose) || !same_bits(g.velocity.x, w.velocity.x) || !same_bits(g.velocity.y, w.velocity.y)) {
      return "peds[" + std::to_string(i) + "]";
    }
  }
  if (got.contacts.size() != want.contacts.size()) return "contacts";
  for (std::size_t i = 0; i < got.contacts.size(); ++i) {
    const auto& g = got.contacts[i];
    const auto& w = want.contacts[i];
    if (g.kind != w.kind || g.other_id != w.other_id || !same_bits(g.gap, w.gap)) {
      return "contacts[" + std::to_string(i) + "]";
    }
  }
  // State matches but the chained digest does not: the stored command (or
  // the digest itself) differs from what was originally recorded.
  if (got.chk != want.chk) return "cmd";
  return {};
}

std::string first_metric_difference(const EpisodeMetrics& got, const EpisodeMetrics& want) {
  if (got.completed != want.completed) return "metrics.completed";
  if (!same_bits(got.elapsed, want.elapsed)) return "metrics.elapsed";
  if (!same_bits(got.final_distance, want.final_distance)) return "metrics.final_distance";
  if (!same_bits(got.min_ped_distance, want.min_ped_distance)) return "metrics.min_ped_distance";
  if (got.ped_collisions != want.ped_collisions) return "metrics.ped_collisions";
  if (got.static_collisions != want.static_collisions) return "metrics.static_collisions";
  if (got.aborted != want.aborted) return "metrics.aborted";
  return {};
}

}  // namespace

std::string metrics_difference(const EpisodeMetrics& got, const EpisodeMetrics& want) {
  return first_metric_difference(got, want);
}

std::pair<std::int64_t, std::int64_t> count_collisions(const std::vector<std::vector<ContactEvent>>& stream) {
  CollisionLatch latch;
  for (const auto& tick : stream) latch.update(tick);
  return {latch.ped_collisions, latch.static_collisions};
}

EpisodeRecord run_episode(const EpisodeConfig& config, SceneResources& resources, Controller& controller) {
  const Scene& scene = resources.scene();
  EpisodeStepper stepper(config, resources);
  bool aborted = false;
  std::string reason;
  try {
    controller.begin_episode(episode_start(config, scene));
    while (!stepper.terminal()) {
      const Observation obs = make_observation(stepper.world(), scene, config.robot_goal, config.scan);
      controller.observe_world(stepper.world());
      const ControllerDecision decision = controller.decide(obs);
      if (!std::isfinite(decision.twist.v) || !std::isfinite(decision.twist.w)) {
        throw ControllerAborted("invalid_command", "controller returned a non-finite command");
      }
      stepper.advance(decision.twist);
    }
  } catch (const ControllerAborted& e) {
    aborted = true;
    reason = e.reason();
  }

  EpisodeRecord record;
  record.config = config;
  record.engine_version = engine_version();
  record.metrics = stepper.finish(aborted, reason);
  record.ticks = std::move(stepper.ticks());
  controller.end_episode(config.episode_id, record.metrics);
  return record;
}

EpisodeMetrics metrics_from_ticks(const EpisodeRecord& record) {
  const EpisodeConfig& cfg = record.config;
  if (record.ticks.empty()) throw SchemaError("record has no ticks");
  EpisodeMetrics m;
  std::vector<std::vector<ContactEvent>> stream;
  stream.reserve(record.ticks.size());
  const double r_robot = cfg.robot.footprint_radius;
  for (const auto& t : record.ticks) {
    if (t.peds.size() != cfg.pedestrians.size()) throw SchemaError("tick pedestrian count differs from config");
    for (std::size_t i = 0; i < t.peds.size(); ++i) {
      const double d = surface_distance(t.pose.position(), r_robot, t.peds[i].pose.position(), cfg.pedestrians[i].radius);
      if (!m.min_ped_distance || d < *m.min_ped_distance) m.min_ped_distance = d;
    }
    stream.push_back(t.contacts);
  }
  std::tie(m.ped_collisions, m.static_collisions) = count_collisions(stream);
  const TickRecord& last = record.ticks.back();
  m.aborted = record.metrics.aborted;
  m.abort_reason = record.metrics.abort_reason;
  m.final_distance = goal_distance(last.pose, cfg.robot_goal);
  m.completed = !m.aborted && m.final_distance <= cfg.goal_tolerance;
  m.elapsed = (m.completed || m.aborted) ? static_cast<double>(last.tick) * cfg.dt : cfg.timeout;
  return m;
}

ReplayMismatch::ReplayMismatch(std::int64_t tick, std::string field)
    : std::runtime_error("replay mismatch at tick " + std::to_string(tick) + ", field '" + field + "'"),
      tick_(tick),
      field_(std::move(field)) {}

EpisodeMetrics replay(const EpisodeRecord& record, SceneResources& resources) {
  if (record.engine_version != engine_version()) {
    throw IncompatibleRecord("record engine '" + record.engine_version + "' is incompatible with '" +
                             engine_version() + "'");
  }
  const EpisodeConfig& cfg = record.config;
  if (cfg.scene != resources.scene().name || cfg.scene_digest != resources.digest()) {
    throw IncompatibleRecord("record was made against a different version of scene '" + cfg.scene + "'");
  }
  if (record.ticks.empty()) throw ReplayMismatch(0, "ticks");

  EpisodeStepper stepper(cfg, resources);
  for (std::size_t k = 0; k < record.ticks.size(); ++k) {
    const TickRecord& want = record.ticks[k];
    if (k > 0) {
      if (stepper.terminal()) throw ReplayMismatch(static_cast<std::int64_t>(k), "termination");
      if (!want.cmd) throw ReplayMismatch(want.tick, "cmd");
      stepper.advance(*want.cmd);
    }
    const std::string diff = first_difference(stepper.ticks().back(), want);
    if (!diff.empty()) throw ReplayMismatch(static_cast<std::int64_t>(k), diff);
  }
  const auto last_tick = static_cast<std::int64_t>(record.ticks.size() - 1);
  if (!record.metrics.aborted && !stepper.terminal()) throw ReplayMismatch(last_tick, "termination");

  const EpisodeMetrics metrics = stepper.finish(record.metrics.aborted, record.metrics.abort_reason);
  const std::string diff = first_metric_difference(metrics, record.metrics);
  if (!diff.empty()) throw ReplayMismatch(last_tick, diff);
  return metrics;
}

EpisodeMetrics replay(const EpisodeRecord& record) {
  SceneResources resources(load_scene(record.config.scene));
  return replay(record, resources);
}

// ---------------------------------------------------------------------------
// Record files: header line, one line per tick, metrics line.

std::string record_to_string(const EpisodeRecord& record) {
  std::string out;
  Json header = Json::object();
  header["record"] = "socnav-episode";
  header["engine_version"] = record.engine_version;
  header["config_hash"] = config_hash(record.config);
  header["config"] = episode_config_to_json(record.config);
  out += header.dump();
  out += '\n';
  for (const auto& t : record.ticks) {
    out += tick_to_json(t).dump();
    out += '\n';
  }
  Json footer = Json::object();
  footer["metrics"] = metrics_to_json(record.metrics);
  out += footer.dump();
  out += '\n';
  return out;
}

void write_record(const std::filesystem::path& path, const EpisodeRecord& record) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write record " + path.string());
  out << record_to_string(record);
  if (!out) throw RuntimeError("failed writing record " + path.string());
}

EpisodeRecord parse_record(const std::string& text, const std::string& source) {
  EpisodeRecord record;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  bool have_metrics = false;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      if (have_metrics) throw SchemaError("content after the metrics line");
      const Json j = Json::parse(line);
      if (!have_header) {
        if (string_field(j, "record") != "socnav-episode") throw SchemaError("not an episode record");
        record.engine_version = string_field(j, "engine_version");
        record.config = episode_config_from_json(field(j, "config"));
        have_header = true;
      } else if (j.contains("metrics")) {
        record.metrics = metrics_from_json(field(j, "metrics"));
        have_metrics = true;
      } else {
        record.ticks.push_back(tick_from_json(j));
      }
    }
  } catch (const Json::parse_error& e) {
    throw ConfigError(source + ":" + std::to_string(line_no) + ": syntax error: " + e.what());
  } catch (const SchemaError& e) {
    throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
  }
  if (!have_header) throw ConfigError(source + ": empty record");
  if (!have_metrics) throw ConfigError(source + ": missing metrics line (truncated record?)");
  if (record.ticks.empty()) throw ConfigError(source + ": record has no ticks");
  return record;
}

EpisodeRecord read_record(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open record " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_record(ss.str(), path.string());
}

}  // namespace socnav
