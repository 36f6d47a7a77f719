#pragma once

// JSON mappings shared by scene files, records, reports and the wire
// protocol. Objects use ordered_json so field order is canonical and dumps
// are byte-stable; doubles dump in shortest round-trip form.

#include <string>

#include <json.hpp>

#include "socnav/crowd.hpp"
#include "socnav/metrics.hpp"
#include "socnav/robot.hpp"
#include "socnav/scene.hpp"
#include "socnav/sensing.hpp"
#include "socnav/world.hpp"

namespace socnav {

using Json = nlohmann::ordered_json;

/// Thrown when a JSON value does not match the expected schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json pose_to_json(const Pose2D& p);  // [x, y, theta]
Pose2D pose_from_json(const Json& j);
Json vec_to_json(Vec2 v);  // [x, y]
Vec2 vec_from_json(const Json& j);
Json twist_to_json(const Twist& t);  // {"v":..,"w":..}
Twist twist_from_json(const Json& j);

Json robot_to_json(const RobotSpec& r);
RobotSpec robot_from_json(const Json& j);
Json social_force_to_json(const SocialForceParams& p);
SocialForceParams social_force_from_json(const Json& j);
Json crowd_config_to_json(const CrowdConfig& c);
CrowdConfig crowd_config_from_json(const Json& j);
Json scan_spec_to_json(const ScanSpec& s);
ScanSpec scan_spec_from_json(const Json& j);
Json pedestrian_to_json(const Pedestrian& p);
Pedestrian pedestrian_from_json(const Json& j);
Json scene_to_json(const Scene& s);
Json metrics_to_json(const EpisodeMetrics& m);
EpisodeMetrics metrics_from_json(const Json& j);
Json observation_to_json(const Observation& o);
Observation observation_from_json(const Json& j);
Json contact_to_json(const ContactEvent& c);  // [kind, id, gap]
ContactEvent contact_from_json(const Json& j);

/// Field accessors that raise SchemaError with the field name.
const Json& field(const Json& j, const char* name);
double number_field(const Json& j, const char* name);
std::int64_t integer_field(const Json& j, const char* name);
bool bool_field(const Json& j, const char* name);
std::string string_field(const Json& j, const char* name);
double as_number(const Json& j, const char* what);

/// True when every number inside `j` is finite.
bool all_finite(const Json& j);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(const std::string& s);

}  // namespace socnav
