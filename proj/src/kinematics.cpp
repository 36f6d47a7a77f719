#include "socnav/kinematics.hpp"

#include <algorithm>
#include <cmath>

namespace socnav {

Pose2D integrate_unicycle(const Pose2D& pose, const Twist& twist, double dt) {
  const double v = twist.v;
  const double w = twist.w;
  if (std::abs(w) < 1e-9) {
    return {pose.x + v * dt * std::cos(pose.theta), pose.y + v * dt * std::sin(pose.theta),
            normalize_angle(pose.theta + w * dt)};
  }
  // Chord form of (v/w)(sin(th + w dt) - sin th) etc. Same arc, but without
  // the cancellation the difference of sines suffers for small w.
  const double half = 0.5 * w * dt;
  const double chord = 2.0 * (v / w) * std::sin(half);
  const double mid = pose.theta + half;
  return {pose.x + chord * std::cos(mid), pose.y + chord * std::sin(mid), normalize_angle(pose.theta + w * dt)};
}

namespace {

double limit(double requested, double previous, double rate, double max_abs, double dt) {
  const double step = rate * dt;
  const double rate_limited = std::clamp(requested, previous - step, previous + step);
  return std::clamp(rate_limited, -max_abs, max_abs);
}

}  // namespace

Twist clamp_twist(const Twist& requested, const Twist& previous, const RobotSpec& spec, double dt) {
  return {limit(requested.v, previous.v, spec.a_max, spec.v_max, dt),
          limit(requested.w, previous.w, spec.alpha_max, spec.w_max, dt)};
}

}  // namespace socnav
