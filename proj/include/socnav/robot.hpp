#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace socnav {

/// Physical footprint and actuation limits of a differential-drive base.
struct RobotSpec {
  std::string name;
  double footprint_radius = 0.0;  // m
  double v_max = 0.0;             // m/s
  double w_max = 0.0;             // rad/s
  double a_max = 0.0;             // m/s^2
  double alpha_max = 0.0;         // rad/s^2

  bool operator==(const RobotSpec&) const = default;
};

RobotSpec jackal_spec();
RobotSpec warthog_spec();

const std::vector<RobotSpec>& builtin_robots();
std::optional<RobotSpec> find_robot(std::string_view name);
std::vector<std::string> robot_names();
/// Throws ConfigError naming the known robots.
RobotSpec require_robot(std::string_view name);

/// Largest footprint among the shipped robots. Scene anchors must clear it.
double largest_robot_radius();

}  // namespace socnav
