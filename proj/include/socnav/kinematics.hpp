#pragma once

#include "socnav/geometry.hpp"
#include "socnav/robot.hpp"

namespace socnav {

/// Exact arc integration of a constant unicycle command over dt.
Pose2D integrate_unicycle(const Pose2D& pose, const Twist& twist, double dt);

/// Rate limit against the previous command, then speed limit.
Twist clamp_twist(const Twist& requested, const Twist& previous, const RobotSpec& spec, double dt);

}  // namespace socnav
