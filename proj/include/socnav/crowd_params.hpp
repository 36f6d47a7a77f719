#pragma once

namespace socnav {

/// Social force gains. Defaults are conventional pedestrian magnitudes.
struct SocialForceParams {
  double tau = 0.5;     // relaxation time, s
  double A = 2.0;       // agent repulsion strength, m/s^2
  double B = 0.35;      // agent repulsion range, m
  double A_obs = 3.0;   // obstacle repulsion strength, m/s^2
  double B_obs = 0.25;  // obstacle repulsion range, m

  bool operator==(const SocialForceParams&) const = default;
};

struct SpeedRange {
  double min = 0.8;
  double max = 1.6;
  bool operator==(const SpeedRange&) const = default;
};

struct CrowdConfig {
  int count = 0;
  SpeedRange desired_speed_range;
  bool regoal = true;

  bool operator==(const CrowdConfig&) const = default;
};

inline constexpr double kPedestrianRadius = 0.25;
inline constexpr double kWaypointPopRadius = 0.3;
inline constexpr double kSpeedCapFactor = 1.3;
inline constexpr double kHeadingSpeedThreshold = 0.05;
inline constexpr double kMaxRepulsion = 50.0;

}  // namespace socnav
