#include "socnav/serialization.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>

namespace socnav {

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) throw SchemaError(std::string("expected an object holding '") + name + "'");
  auto it = j.find(name);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + name + "'");
  return *it;
}

double as_number(const Json& j, const char* what) {
  if (!j.is_number()) throw SchemaError(std::string("field '") + what + "' must be a number");
  return j.get<double>();
}

double number_field(const Json& j, const char* name) { return as_number(field(j, name), name); }

std::int64_t integer_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number_integer()) throw SchemaError(std::string("field '") + name + "' must be an integer");
  return v.get<std::int64_t>();
}

bool bool_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_boolean()) throw SchemaError(std::string("field '") + name + "' must be a boolean");
  return v.get<bool>();
}

std::string string_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_string()) throw SchemaError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

bool all_finite(const Json& j) {
  if (j.is_number_float()) return std::isfinite(j.get<double>());
  if (j.is_structured()) {
    for (const auto& v : j) {
      if (!all_finite(v)) return false;
    }
  }
  return true;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  if (s.size() != 16) throw SchemaError("expected 16 hex digits, got '" + s + "'");
  std::uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
    else throw SchemaError("bad hex digit in '" + s + "'");
  }
  return v;
}

namespace {

const Json& array_of(const Json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) {
    throw SchemaError(std::string(what) + " must be an array of " + std::to_string(n) + " numbers");
  }
  return j;
}

}  // namespace

Json pose_to_json(const Pose2D& p) { return Json::array({p.x, p.y, p.theta}); }

Pose2D pose_from_json(const Json& j) {
  array_of(j, 3, "pose");
  return {as_number(j[0], "pose[0]"), as_number(j[1], "pose[1]"), as_number(j[2], "pose[2]")};
}

Json vec_to_json(Vec2 v) { return Json::array({v.x, v.y}); }

Vec2 vec_from_json(const Json& j) {
  array_of(j, 2, "point");
  return {as_number(j[0], "point[0]"), as_number(j[1], "point[1]")};
}

Json twist_to_json(const Twist& t) {
  Json j = Json::object();
  j["v"] = t.v;
  j["w"] = t.w;
  return j;
}

Twist twist_from_json(const Json& j) { return {number_field(j, "v"), number_field(j, "w")}; }

Json robot_to_json(const RobotSpec& r) {
  Json j = Json::object();
  j["name"] = r.name;
  j["footprint_radius"] = r.footprint_radius;
  j["v_max"] = r.v_max;
  j["w_max"] = r.w_max;
  j["a_max"] = r.a_max;
  j["alpha_max"] = r.alpha_max;
  return j;
}

RobotSpec robot_from_json(const Json& j) {
  return {string_field(j, "name"),       number_field(j, "footprint_radius"), number_field(j, "v_max"),
          number_field(j, "w_max"),      number_field(j, "a_max"),            number_field(j, "alpha_max")};
}

Json social_force_to_json(const SocialForceParams& p) {
  Json j = Json::object();
  j["tau"] = p.tau;
  j["A"] = p.A;
  j["B"] = p.B;
  j["A_obs"] = p.A_obs;
  j["B_obs"] = p.B_obs;
  return j;
}

SocialForceParams social_force_from_json(const Json& j) {
  return {number_field(j, "tau"), number_field(j, "A"), number_field(j, "B"), number_field(j, "A_obs"),
          number_field(j, "B_obs")};
}

Json crowd_config_to_json(const CrowdConfig& c) {
  Json j = Json::object();
  j["count"] = c.count;
  j["regoal"] = c.regoal;
  j["speed_range"] = Json::array({c.desired_speed_range.min, c.desired_speed_range.max});
  return j;
}

CrowdConfig crowd_config_from_json(const Json& j) {
  CrowdConfig c;
  if (!j.is_object()) throw SchemaError("crowd must be an object");
  if (j.contains("count")) c.count = static_cast<int>(integer_field(j, "count"));
  if (j.contains("regoal")) c.regoal = bool_field(j, "regoal");
  if (j.contains("speed_range")) {
    const Json& r = array_of(field(j, "speed_range"), 2, "speed_range");
    c.desired_speed_range = {as_number(r[0], "speed_range[0]"), as_number(r[1], "speed_range[1]")};
  }
  return c;
}

Json scan_spec_to_json(const ScanSpec& s) {
  Json j = Json::object();
  j["beam_count"] = s.beam_count;
  j["fov"] = s.fov;
  j["r_min"] = s.r_min;
  j["r_max"] = s.r_max;
  j["angular_offset"] = s.angular_offset;
  return j;
}

ScanSpec scan_spec_from_json(const Json& j) {
  ScanSpec s;
  if (!j.is_object()) throw SchemaError("scan must be an object");
  if (j.contains("beam_count")) s.beam_count = static_cast<int>(integer_field(j, "beam_count"));
  if (j.contains("fov")) s.fov = number_field(j, "fov");
  if (j.contains("r_min")) s.r_min = number_field(j, "r_min");
  if (j.contains("r_max")) s.r_max = number_field(j, "r_max");
  if (j.contains("angular_offset")) s.angular_offset = number_field(j, "angular_offset");
  return s;
}

Json pedestrian_to_json(const Pedestrian& p) {
  Json j = Json::object();
  j["id"] = p.id;
  j["pose"] = pose_to_json(p.pose);
  j["velocity"] = vec_to_json(p.velocity);
  j["radius"] = p.radius;
  j["desired_speed"] = p.desired_speed;
  j["goal"] = pose_to_json(p.goal);
  j["goal_anchor"] = p.goal_anchor;
  Json wps = Json::array();
  for (const auto& w : p.waypoints) wps.push_back(vec_to_json(w));
  j["waypoints"] = std::move(wps);
  j["rng_state"] = hex64(p.rng_state);
  return j;
}

Pedestrian pedestrian_from_json(const Json& j) {
  Pedestrian p;
  p.id = static_cast<int>(integer_field(j, "id"));
  p.pose = pose_from_json(field(j, "pose"));
  p.velocity = vec_from_json(field(j, "velocity"));
  p.radius = number_field(j, "radius");
  p.desired_speed = number_field(j, "desired_speed");
  p.goal = pose_from_json(field(j, "goal"));
  p.goal_anchor = static_cast<int>(integer_field(j, "goal_anchor"));
  const Json& wps = field(j, "waypoints");
  if (!wps.is_array()) throw SchemaError("waypoints must be an array");
  for (const auto& w : wps) p.waypoints.push_back(vec_from_json(w));
  p.rng_state = parse_hex64(string_field(j, "rng_state"));
  return p;
}

Json scene_to_json(const Scene& s) {
  Json j = Json::object();
  j["name"] = s.name;
  j["bounds"] = Json::array({s.bounds.min_x, s.bounds.min_y, s.bounds.max_x, s.bounds.max_y});
  j["grid_resolution"] = s.grid_resolution;
  Json obstacles = Json::array();
  for (const auto& poly : s.obstacles) {
    Json pts = Json::array();
    for (const auto& v : poly) pts.push_back(vec_to_json(v));
    obstacles.push_back(std::move(pts));
  }
  j["obstacles"] = std::move(obstacles);
  for (const auto* key : {"ped_anchors", "robot_anchors"}) {
    const auto& anchors = std::string_view(key) == "ped_anchors" ? s.ped_anchors : s.robot_anchors;
    Json arr = Json::array();
    for (const auto& a : anchors) arr.push_back(pose_to_json(a));
    j[key] = std::move(arr);
  }
  if (s.social_force) j["social_force"] = social_force_to_json(*s.social_force);
  return j;
}

Json metrics_to_json(const EpisodeMetrics& m) {
  Json j = Json::object();
  j["completed"] = m.completed;
  j["elapsed"] = m.elapsed;
  j["final_distance"] = m.final_distance;
  j["min_ped_distance"] = m.min_ped_distance ? Json(*m.min_ped_distance) : Json(nullptr);
  j["ped_collisions"] = m.ped_collisions;
  j["static_collisions"] = m.static_collisions;
  j["aborted"] = m.aborted;
  j["abort_reason"] = m.abort_reason;
  return j;
}

EpisodeMetrics metrics_from_json(const Json& j) {
  EpisodeMetrics m;
  m.completed = bool_field(j, "completed");
  m.elapsed = number_field(j, "elapsed");
  m.final_distance = number_field(j, "final_distance");
  const Json& mpd = field(j, "min_ped_distance");
  if (!mpd.is_null()) m.min_ped_distance = as_number(mpd, "min_ped_distance");
  m.ped_collisions = integer_field(j, "ped_collisions");
  m.static_collisions = integer_field(j, "static_collisions");
  if (j.contains("aborted")) m.aborted = bool_field(j, "aborted");
  if (j.contains("abort_reason")) m.abort_reason = string_field(j, "abort_reason");
  return m;
}

Json observation_to_json(const Observation& o) {
  Json j = Json::object();
  j["tick"] = o.tick;
  j["sim_time"] = o.sim_time;
  j["pose"] = pose_to_json(o.pose);
  j["twist"] = twist_to_json(o.twist);
  j["goal"] = pose_to_json(o.goal);
  j["scan"] = o.scan;
  j["nearest_ped_distance"] = o.nearest_ped_distance ? Json(*o.nearest_ped_distance) : Json(nullptr);
  return j;
}

Observation observation_from_json(const Json& j) {
  Observation o;
  o.tick = integer_field(j, "tick");
  o.sim_time = number_field(j, "sim_time");
  o.pose = pose_from_json(field(j, "pose"));
  o.twist = twist_from_json(field(j, "twist"));
  o.goal = pose_from_json(field(j, "goal"));
  const Json& scan = field(j, "scan");
  if (!scan.is_array()) throw SchemaError("scan must be an array");
  o.scan.reserve(scan.size());
  for (const auto& r : scan) o.scan.push_back(as_number(r, "scan[]"));
  const Json& n = field(j, "nearest_ped_distance");
  if (!n.is_null()) o.nearest_ped_distance = as_number(n, "nearest_ped_distance");
  return o;
}

Json contact_to_json(const ContactEvent& c) {
  return Json::array({std::string(to_string(c.kind)), c.other_id, c.gap});
}

ContactEvent contact_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_string() || !j[1].is_number_integer()) {
    throw SchemaError("contact must be [kind, id, gap]");
  }
  try {
    return {contact_kind_from_string(j[0].get<std::string>()), j[1].get<int>(), as_number(j[2], "contact gap")};
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
}

}  // namespace socnav
