#include "socnav/robot.hpp"

#include <algorithm>

#include "socnav/errors.hpp"

namespace socnav {

RobotSpec jackal_spec() { return {"jackal", 0.25, 2.0, 4.0, 20.0, 25.0}; }

RobotSpec warthog_spec() { return {"warthog", 0.70, 5.0, 4.0, 20.0, 25.0}; }

const std::vector<RobotSpec>& builtin_robots() {
  static const std::vector<RobotSpec> robots{jackal_spec(), warthog_spec()};
  return robots;
}

std::optional<RobotSpec> find_robot(std::string_view name) {
  for (const auto& r : builtin_robots()) {
    if (r.name == name) return r;
  }
  return std::nullopt;
}

std::vector<std::string> robot_names() {
  std::vector<std::string> names;
  for (const auto& r : builtin_robots()) names.push_back(r.name);
  return names;
}

double largest_robot_radius() {
  double r = 0.0;
  for (const auto& spec : builtin_robots()) r = std::max(r, spec.footprint_radius);
  return r;
}

RobotSpec require_robot(std::string_view name) {
  if (auto r = find_robot(name)) return *r;
  std::string known;
  for (const auto& n : robot_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown robot '" + std::string(name) + "' (known robots: " + known + ")");
}

}  // namespace socnav
