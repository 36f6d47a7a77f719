#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "socnav/scene.hpp"
#include "socnav/trial.hpp"

namespace socnav::test {

inline Polygon rect(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

/// Scene with the given bounds, no obstacles and a pair of robot anchors.
inline Scene open_scene(Bounds b, double resolution = 0.1) {
  Scene s;
  s.name = "test";
  s.bounds = b;
  s.grid_resolution = resolution;
  return s;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("socnav_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Straight-line episode in an open scene; no pedestrians.
inline EpisodeConfig corridor_episode(const Scene& scene, RobotSpec robot, Pose2D start, Pose2D goal, double timeout,
                                      double tolerance = 0.5) {
  EpisodeConfig c;
  c.episode_id = 0;
  c.scene = scene.name;
  c.scene_digest = scene_digest(scene);
  c.robot = robot;
  c.robot_start = start;
  c.robot_goal = goal;
  c.timeout = timeout;
  c.goal_tolerance = tolerance;
  c.crowd.count = 0;
  return c;
}

}  // namespace socnav::test
