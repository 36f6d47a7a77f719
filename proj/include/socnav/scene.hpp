#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "socnav/crowd_params.hpp"
#include "socnav/geometry.hpp"

namespace socnav {

/// Static world: walkable rectangle, obstacle polygons and curated anchors
/// from which robot and pedestrian start/goal poses are sampled.
struct Scene {
  std::string name;
  Bounds bounds;
  double grid_resolution = 0.1;
  std::vector<Polygon> obstacles;  // counter-clockwise
  std::vector<Pose2D> ped_anchors;
  std::vector<Pose2D> robot_anchors;
  std::optional<SocialForceParams> social_force;
};

/// Throws ConfigError naming the offending field when an invariant fails.
/// `anchor_clearance` is the radius every anchor must clear.
void validate_scene(const Scene& scene, double anchor_clearance);

/// Parses and validates a scene document.
Scene parse_scene(std::string_view text, const std::string& source = "<scene>");
Scene load_scene_file(const std::filesystem::path& path);

/// Directories searched for `<name>.json`: entries of SOCNAV_SCENE_PATH
/// first, then the shipped scene directory.
std::vector<std::filesystem::path> scene_search_path();
std::vector<std::string> scene_names();
/// Throws ConfigError listing the known scenes when `name` is not found.
Scene load_scene(std::string_view name);

/// Signed clearance from a point to all static geometry (obstacles and
/// bounds). Negative when inside an obstacle or outside the bounds.
double static_clearance(const Scene& scene, Vec2 p);

}  // namespace socnav
