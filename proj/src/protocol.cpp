#include "socnav/protocol.hpp"

#include <array>

#include "socnav/trial.hpp"
#include "socnav/world.hpp"

namespace socnav {

namespace {

constexpr std::array<std::pair<MessageType, std::string_view>, 10> kTypeNames{{
    {MessageType::hello, "hello"},
    {MessageType::scene_info, "scene_info"},
    {MessageType::episode_start, "episode_start"},
    {MessageType::obs, "obs"},
    {MessageType::cmd, "cmd"},
    {MessageType::episode_end, "episode_end"},
    {MessageType::trial_end, "trial_end"},
    {MessageType::error, "error"},
    {MessageType::ping, "ping"},
    {MessageType::pong, "pong"},
}};

[[noreturn]] void schema(const std::string& what) { throw SchemaError(what); }

void require_string_in(const Json& p, const char* name, std::initializer_list<std::string_view> allowed) {
  const std::string v = string_field(p, name);
  for (auto a : allowed) {
    if (v == a) return;
  }
  schema("field '" + std::string(name) + "' has unsupported value '" + v + "'");
}

Json aggregate_json(const std::optional<Aggregate>& a) {
  if (!a) return nullptr;
  Json j = Json::object();
  j["mean"] = a->mean;
  j["stddev"] = a->stddev;
  j["n"] = a->n;
  return j;
}

}  // namespace

std::string_view to_string(MessageType type) {
  for (const auto& [t, name] : kTypeNames) {
    if (t == type) return name;
  }
  return "unknown";
}

std::optional<MessageType> message_type_from_string(std::string_view s) {
  for (const auto& [t, name] : kTypeNames) {
    if (name == s) return t;
  }
  return std::nullopt;
}

std::string_view to_string(ClientRole role) {
  switch (role) {
    case ClientRole::controller: return "controller";
    case ClientRole::teleop: return "teleop";
    case ClientRole::spectator: return "spectator";
  }
  return "spectator";
}

std::optional<ClientRole> client_role_from_string(std::string_view s) {
  if (s == "controller") return ClientRole::controller;
  if (s == "teleop") return ClientRole::teleop;
  if (s == "spectator") return ClientRole::spectator;
  return std::nullopt;
}

std::string_view to_string(SessionMode mode) { return mode == SessionMode::lockstep ? "lockstep" : "realtime"; }

std::optional<SessionMode> session_mode_from_string(std::string_view s) {
  if (s == "lockstep") return SessionMode::lockstep;
  if (s == "realtime") return SessionMode::realtime;
  return std::nullopt;
}

void validate_payload(MessageType type, const Json& p) {
  if (!p.is_object()) schema("payload must be an object");
  switch (type) {
    case MessageType::hello:
      require_string_in(p, "role", {"controller", "teleop", "spectator"});
      break;
    case MessageType::scene_info:
      if (!field(p, "scene").is_object()) schema("field 'scene' must be an object");
      integer_field(p, "episodes");
      require_string_in(p, "mode", {"lockstep", "realtime"});
      break;
    case MessageType::episode_start:
      integer_field(p, "episode_id");
      pose_from_json(field(p, "start"));
      pose_from_json(field(p, "goal"));
      robot_from_json(field(p, "robot_spec"));
      number_field(p, "goal_tolerance");
      string_field(p, "config_hash");
      break;
    case MessageType::obs:
      observation_from_json(p);
      break;
    case MessageType::cmd:
      twist_from_json(p);
      break;
    case MessageType::episode_end:
      integer_field(p, "episode_id");
      metrics_from_json(field(p, "metrics"));
      break;
    case MessageType::trial_end:
      if (!field(p, "report").is_object()) schema("field 'report' must be an object");
      break;
    case MessageType::error: {
      string_field(p, "reason");
      const Json& s = field(p, "offending_seq");
      if (!s.is_null() && !s.is_number_integer()) schema("field 'offending_seq' must be an integer or null");
      string_field(p, "message");
      break;
    }
    case MessageType::ping:
    case MessageType::pong:
      break;
  }
}

std::string encode(const Envelope& env) {
  try {
    validate_payload(env.type, env.payload);
  } catch (const SchemaError& e) {
    throw EncodeError(std::string("invalid ") + std::string(to_string(env.type)) + " payload: " + e.what());
  }
  if (!all_finite(env.payload)) throw EncodeError("payload contains a non-finite number");
  Json j = Json::object();
  j["type"] = std::string(to_string(env.type));
  j["seq"] = env.seq;
  j["payload"] = env.payload;
  std::string line = j.dump();
  line += '\n';
  return line;
}

Envelope decode(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw ProtocolError("parse", std::nullopt, std::string("malformed message: ") + e.what());
  }
  std::optional<std::int64_t> seq;
  if (j.is_object()) {
    if (auto it = j.find("seq"); it != j.end() && it->is_number_integer()) seq = it->get<std::int64_t>();
  }
  try {
    Envelope env;
    const auto type = message_type_from_string(string_field(j, "type"));
    if (!type) schema("unknown message type '" + string_field(j, "type") + "'");
    env.type = *type;
    env.seq = integer_field(j, "seq");
    env.payload = field(j, "payload");
    validate_payload(env.type, env.payload);
    return env;
  } catch (const SchemaError& e) {
    throw ProtocolError("schema", seq, e.what());
  }
}

void SeqChecker::check(const Envelope& env) {
  if (env.seq != expected_) {
    const std::int64_t want = expected_;
    expected_ = env.seq + 1;
    throw ProtocolError("seq", env.seq,
                        "expected seq " + std::to_string(want) + ", got " + std::to_string(env.seq));
  }
  ++expected_;
}

Json hello_payload(ClientRole role) {
  Json j = Json::object();
  j["role"] = std::string(to_string(role));
  return j;
}

Json scene_info_payload(const Scene& scene, int episodes, SessionMode mode) {
  Json j = Json::object();
  j["scene"] = scene_to_json(scene);
  j["episodes"] = episodes;
  j["mode"] = std::string(to_string(mode));
  return j;
}

Json episode_start_payload(std::int64_t episode_id, const Pose2D& start, const Pose2D& goal, const RobotSpec& robot,
                           double goal_tolerance, const std::string& config_hash) {
  Json j = Json::object();
  j["episode_id"] = episode_id;
  j["start"] = pose_to_json(start);
  j["goal"] = pose_to_json(goal);
  j["robot_spec"] = robot_to_json(robot);
  j["goal_tolerance"] = goal_tolerance;
  j["config_hash"] = config_hash;
  return j;
}

Json obs_payload(const Observation& obs, const WorldState* world) {
  Json j = observation_to_json(obs);
  if (world != nullptr) {
    Json peds = Json::array();
    for (const auto& p : world->pedestrians) {
      Json pj = Json::object();
      pj["id"] = p.id;
      pj["pose"] = pose_to_json(p.pose);
      pj["radius"] = p.radius;
      peds.push_back(std::move(pj));
    }
    j["pedestrians"] = std::move(peds);
    Json live = Json::object();
    live["ped_collisions"] = world->collisions.ped_collisions;
    live["static_collisions"] = world->collisions.static_collisions;
    j["live"] = std::move(live);
  }
  return j;
}

Json cmd_payload(const Twist& cmd) { return twist_to_json(cmd); }

Json episode_end_payload(std::int64_t episode_id, const EpisodeMetrics& metrics) {
  Json j = Json::object();
  j["episode_id"] = episode_id;
  j["metrics"] = metrics_to_json(metrics);
  return j;
}

Json trial_end_payload(const TrialReport& report) {
  Json r = Json::object();
  r["scene"] = report.scene;
  r["robot"] = report.robot;
  r["controller"] = report.controller;
  Json rows = Json::array();
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    Json row = metrics_to_json(report.rows[i]);
    row["episode_id"] = i < report.episode_ids.size() ? report.episode_ids[i] : static_cast<std::int64_t>(i);
    rows.push_back(std::move(row));
  }
  r["rows"] = std::move(rows);
  r["n"] = report.n;
  r["aborted"] = report.aborted;
  r["completion_rate"] = report.completion_rate;
  r["elapsed"] = aggregate_json(report.elapsed);
  r["final_distance"] = aggregate_json(report.final_distance);
  r["min_ped_distance"] = aggregate_json(report.min_ped_distance);
  r["collisions"] = aggregate_json(report.collisions);
  Json j = Json::object();
  j["report"] = std::move(r);
  return j;
}

Json error_payload(const std::string& reason, std::optional<std::int64_t> offending_seq, const std::string& message) {
  Json j = Json::object();
  j["reason"] = reason;
  j["offending_seq"] = offending_seq ? Json(*offending_seq) : Json(nullptr);
  j["message"] = message;
  return j;
}

}  // namespace socnav
