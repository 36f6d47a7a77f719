#include "socnav/scene.hpp"

#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "socnav/errors.hpp"
#include "socnav/robot.hpp"

#ifndef SOCNAV_SCENE_DIR
#define SOCNAV_SCENE_DIR "scenes"
#endif

namespace socnav {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& source, const std::string& field, const std::string& what) {
  throw ConfigError(source + ": field '" + field + "': " + what);
}

double number_at(const json& j, const std::string& source, const std::string& field) {
  if (!j.is_number()) fail(source, field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(source, field, "must be finite");
  return v;
}

Vec2 point_at(const json& j, const std::string& source, const std::string& field) {
  if (!j.is_array() || j.size() != 2) fail(source, field, "expected [x, y]");
  return {number_at(j[0], source, field + "[0]"), number_at(j[1], source, field + "[1]")};
}

Pose2D pose_at(const json& j, const std::string& source, const std::string& field) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3)) fail(source, field, "expected [x, y, theta]");
  Pose2D p{number_at(j[0], source, field + "[0]"), number_at(j[1], source, field + "[1]"), 0.0};
  if (j.size() == 3) p.theta = normalize_angle(number_at(j[2], source, field + "[2]"));
  return p;
}

const json& require(const json& j, const char* key, const std::string& source) {
  auto it = j.find(key);
  if (it == j.end()) fail(source, key, "missing");
  return *it;
}

void check_anchor(const Scene& scene, const Pose2D& a, double clearance, const std::string& field) {
  const Vec2 p = a.position();
  if (scene.bounds.interior_clearance(p) < clearance) {
    fail(scene.name, field, "anchor must lie inside bounds with clearance " + std::to_string(clearance));
  }
  for (std::size_t k = 0; k < scene.obstacles.size(); ++k) {
    if (signed_distance_to_polygon(p, scene.obstacles[k]) <= clearance) {
      fail(scene.name, field, "anchor overlaps obstacles[" + std::to_string(k) + "] inflated by " +
                                  std::to_string(clearance));
    }
  }
}

}  // namespace

void validate_scene(const Scene& scene, double anchor_clearance) {
  const std::string& src = scene.name.empty() ? std::string("<scene>") : scene.name;
  if (scene.name.empty()) fail(src, "name", "must be non-empty");
  if (!(scene.bounds.width() > 0.0 && scene.bounds.height() > 0.0)) fail(src, "bounds", "empty rectangle");
  if (!(scene.grid_resolution > 0.0)) fail(src, "grid_resolution", "must be positive");
  for (std::size_t k = 0; k < scene.obstacles.size(); ++k) {
    const auto& poly = scene.obstacles[k];
    const std::string field = "obstacles[" + std::to_string(k) + "]";
    if (poly.size() < 3) fail(src, field, "needs at least 3 vertices");
    const double area = signed_area(poly);
    if (std::abs(area) < 1e-9) fail(src, field, "degenerate polygon (zero area)");
    if (area < 0.0) fail(src, field, "vertices must be counter-clockwise");
    if (!is_simple_polygon(poly)) fail(src, field, "polygon self-intersects");
  }
  for (std::size_t k = 0; k < scene.ped_anchors.size(); ++k) {
    check_anchor(scene, scene.ped_anchors[k], anchor_clearance, "ped_anchors[" + std::to_string(k) + "]");
  }
  for (std::size_t k = 0; k < scene.robot_anchors.size(); ++k) {
    check_anchor(scene, scene.robot_anchors[k], anchor_clearance, "robot_anchors[" + std::to_string(k) + "]");
  }
}

Scene parse_scene(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset to line number for the diagnostic.
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ConfigError(source + ":" + std::to_string(line) + ": syntax error: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(source + ": top level must be an object");

  Scene scene;
  const json& name = require(doc, "name", source);
  if (!name.is_string()) fail(source, "name", "expected a string");
  scene.name = name.get<std::string>();

  const json& b = require(doc, "bounds", source);
  if (!b.is_array() || b.size() != 4) fail(source, "bounds", "expected [min_x, min_y, max_x, max_y]");
  scene.bounds = {number_at(b[0], source, "bounds[0]"), number_at(b[1], source, "bounds[1]"),
                  number_at(b[2], source, "bounds[2]"), number_at(b[3], source, "bounds[3]")};
  scene.grid_resolution = number_at(require(doc, "grid_resolution", source), source, "grid_resolution");

  const json& obstacles = require(doc, "obstacles", source);
  if (!obstacles.is_array()) fail(source, "obstacles", "expected an array of polygons");
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    const std::string field = "obstacles[" + std::to_string(k) + "]";
    if (!obstacles[k].is_array()) fail(source, field, "expected an array of [x, y]");
    Polygon poly;
    for (std::size_t v = 0; v < obstacles[k].size(); ++v) {
      poly.push_back(point_at(obstacles[k][v], source, field + "[" + std::to_string(v) + "]"));
    }
    scene.obstacles.push_back(std::move(poly));
  }

  for (const char* key : {"ped_anchors", "robot_anchors"}) {
    const json& anchors = require(doc, key, source);
    if (!anchors.is_array()) fail(source, key, "expected an array of [x, y, theta]");
    auto& out = std::string_view(key) == "ped_anchors" ? scene.ped_anchors : scene.robot_anchors;
    for (std::size_t k = 0; k < anchors.size(); ++k) {
      out.push_back(pose_at(anchors[k], source, std::string(key) + "[" + std::to_string(k) + "]"));
    }
  }

  if (auto it = doc.find("social_force"); it != doc.end()) {
    SocialForceParams p;
    const auto get = [&](const char* k, double& dst) {
      if (auto f = it->find(k); f != it->end()) dst = number_at(*f, source, std::string("social_force.") + k);
      if (!(dst > 0.0)) fail(source, std::string("social_force.") + k, "must be positive");
    };
    get("tau", p.tau);
    get("A", p.A);
    get("B", p.B);
    get("A_obs", p.A_obs);
    get("B_obs", p.B_obs);
    scene.social_force = p;
  }

  try {
    validate_scene(scene, largest_robot_radius());
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return scene;
}

Scene load_scene_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scene file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str(), path.string());
}

std::vector<std::filesystem::path> scene_search_path() {
  std::vector<std::filesystem::path> dirs;
  if (const char* env = std::getenv("SOCNAV_SCENE_PATH"); env != nullptr) {
    std::string_view rest(env);
    while (!rest.empty()) {
      const auto colon = rest.find(':');
      const auto part = rest.substr(0, colon);
      if (!part.empty()) dirs.emplace_back(std::string(part));
      if (colon == std::string_view::npos) break;
      rest.remove_prefix(colon + 1);
    }
  }
  dirs.emplace_back(SOCNAV_SCENE_DIR);
  return dirs;
}

std::vector<std::string> scene_names() {
  std::set<std::string> names;
  for (const auto& dir : scene_search_path()) {
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
      if (entry.path().extension() == ".json") names.insert(entry.path().stem().string());
    }
  }
  return {names.begin(), names.end()};
}

Scene load_scene(std::string_view name) {
  for (const auto& dir : scene_search_path()) {
    const auto candidate = dir / (std::string(name) + ".json");
    std::error_code ec;
    if (std::filesystem::is_regular_file(candidate, ec)) return load_scene_file(candidate);
  }
  std::string known;
  for (const auto& n : scene_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown scene '" + std::string(name) + "' (known scenes: " + known + ")");
}

double static_clearance(const Scene& scene, Vec2 p) {
  double best = scene.bounds.interior_clearance(p);
  for (const auto& poly : scene.obstacles) best = std::min(best, signed_distance_to_polygon(p, poly));
  return best;
}

}  // namespace socnav
