#include <cmath>
#include <fstream>
#include <sstream>

#include "socnav/errors.hpp"
#include "socnav/rng.hpp"
#include "socnav/trial.hpp"

namespace socnav {

std::string engine_version() { return std::string("socnav-1.0/") + std::string(kStepOrderVersion); }

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::builtin: return "builtin";
    case ControllerKind::teleop: return "teleop";
    case ControllerKind::external: return "external";
    case ControllerKind::idle: return "idle";
  }
  return "builtin";
}

ControllerKind controller_kind_from_string(std::string_view s) {
  if (s == "builtin") return ControllerKind::builtin;
  if (s == "teleop") return ControllerKind::teleop;
  if (s == "external") return ControllerKind::external;
  if (s == "idle") return ControllerKind::idle;
  throw ConfigError("unknown controller '" + std::string(s) + "' (known: builtin, teleop, external, idle)");
}

void validate_trial_config(const TrialConfig& c) {
  if (c.episodes < 0) throw ConfigError("episodes must be >= 0");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw ConfigError("dt must be positive");
  if (!(c.timeout > 0.0) || !std::isfinite(c.timeout)) throw ConfigError("timeout must be positive");
  const double ticks = c.timeout / c.dt;
  if (std::abs(ticks - std::round(ticks)) > 1e-6) throw ConfigError("timeout must be a whole number of dt steps");
  if (!(c.goal_tolerance > 0.0)) throw ConfigError("goal_tolerance must be positive");
  if (c.crowd.count < 0) throw ConfigError("crowd.count must be >= 0");
  if (!(c.crowd.desired_speed_range.min > 0.0) || c.crowd.desired_speed_range.min > c.crowd.desired_speed_range.max) {
    throw ConfigError("crowd.speed_range must satisfy 0 < min <= max");
  }
  validate_scan_spec(c.scan);
}

Json trial_config_to_json(const TrialConfig& c) {
  Json j = Json::object();
  j["scene"] = c.scene;
  j["robot"] = c.robot;
  j["controller"] = std::string(to_string(c.controller));
  j["episodes"] = c.episodes;
  j["master_seed"] = c.master_seed;
  j["crowd"] = crowd_config_to_json(c.crowd);
  j["timeout"] = c.timeout;
  j["goal_tolerance"] = c.goal_tolerance;
  j["dt"] = c.dt;
  j["scan"] = scan_spec_to_json(c.scan);
  return j;
}

TrialConfig trial_config_from_json(const Json& j) {
  TrialConfig c;
  try {
    if (!j.is_object()) throw SchemaError("trial config must be an object");
    if (j.contains("scene")) c.scene = string_field(j, "scene");
    if (j.contains("robot")) c.robot = string_field(j, "robot");
    if (j.contains("controller")) c.controller = controller_kind_from_string(string_field(j, "controller"));
    if (j.contains("episodes")) c.episodes = static_cast<int>(integer_field(j, "episodes"));
    if (j.contains("master_seed")) {
      const Json& s = field(j, "master_seed");
      if (!s.is_number_integer()) throw SchemaError("field 'master_seed' must be an integer");
      c.master_seed = s.get<std::uint64_t>();
    }
    if (j.contains("crowd")) {
      const int count = c.crowd.count;
      c.crowd = crowd_config_from_json(field(j, "crowd"));
      if (!field(j, "crowd").contains("count")) c.crowd.count = count;
    }
    if (j.contains("timeout")) c.timeout = number_field(j, "timeout");
    if (j.contains("goal_tolerance")) c.goal_tolerance = number_field(j, "goal_tolerance");
    if (j.contains("dt")) c.dt = number_field(j, "dt");
    if (j.contains("scan")) c.scan = scan_spec_from_json(field(j, "scan"));
  } catch (const SchemaError& e) {
    throw ConfigError(std::string("trial config: ") + e.what());
  }
  validate_trial_config(c);
  return c;
}

TrialConfig load_trial_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trial config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": syntax error: " + e.what());
  }
  return trial_config_from_json(j);
}

Json episode_config_to_json(const EpisodeConfig& c) {
  Json j = Json::object();
  j["episode_id"] = c.episode_id;
  j["master_seed"] = c.master_seed;
  j["episode_seed"] = hex64(c.episode_seed);
  j["scene"] = c.scene;
  j["scene_digest"] = c.scene_digest;
  j["robot"] = robot_to_json(c.robot);
  j["robot_start"] = pose_to_json(c.robot_start);
  j["robot_goal"] = pose_to_json(c.robot_goal);
  j["start_anchor"] = c.start_anchor;
  j["goal_anchor"] = c.goal_anchor;
  j["crowd"] = crowd_config_to_json(c.crowd);
  Json peds = Json::array();
  for (const auto& p : c.pedestrians) peds.push_back(pedestrian_to_json(p));
  j["pedestrians"] = std::move(peds);
  j["social_force"] = social_force_to_json(c.social_force);
  j["dt"] = c.dt;
  j["timeout"] = c.timeout;
  j["goal_tolerance"] = c.goal_tolerance;
  j["scan"] = scan_spec_to_json(c.scan);
  return j;
}

EpisodeConfig episode_config_from_json(const Json& j) {
  EpisodeConfig c;
  c.episode_id = integer_field(j, "episode_id");
  const Json& ms = field(j, "master_seed");
  if (!ms.is_number_integer()) throw SchemaError("field 'master_seed' must be an integer");
  c.master_seed = ms.get<std::uint64_t>();
  c.episode_seed = parse_hex64(string_field(j, "episode_seed"));
  c.scene = string_field(j, "scene");
  c.scene_digest = string_field(j, "scene_digest");
  c.robot = robot_from_json(field(j, "robot"));
  c.robot_start = pose_from_json(field(j, "robot_start"));
  c.robot_goal = pose_from_json(field(j, "robot_goal"));
  c.start_anchor = static_cast<int>(integer_field(j, "start_anchor"));
  c.goal_anchor = static_cast<int>(integer_field(j, "goal_anchor"));
  c.crowd = crowd_config_from_json(field(j, "crowd"));
  const Json& peds = field(j, "pedestrians");
  if (!peds.is_array()) throw SchemaError("pedestrians must be an array");
  for (const auto& p : peds) c.pedestrians.push_back(pedestrian_from_json(p));
  c.social_force = social_force_from_json(field(j, "social_force"));
  c.dt = number_field(j, "dt");
  c.timeout = number_field(j, "timeout");
  c.goal_tolerance = number_field(j, "goal_tolerance");
  c.scan = scan_spec_from_json(field(j, "scan"));
  return c;
}

std::string config_hash(const EpisodeConfig& c) { return hex64(fnv1a64(episode_config_to_json(c).dump())); }

std::string scene_digest(const Scene& scene) { return hex64(fnv1a64(scene_to_json(scene).dump())); }

}  // namespace socnav
