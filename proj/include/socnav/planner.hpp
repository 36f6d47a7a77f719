#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "socnav/geometry.hpp"
#include "socnav/occupancy.hpp"

namespace socnav {

class NoPathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSqrt2 = 1.4142135623730951;

/// 8-connected grid path. Diagonal moves may not cut an occupied corner.
struct GridPath {
  std::vector<Cell> cells;
  int straight_moves = 0;
  int diagonal_moves = 0;

  /// Length in cell units.
  double cost() const { return straight_moves + diagonal_moves * kSqrt2; }
};

/// A* with the octile heuristic. Returns nullopt when goal is unreachable
/// or either endpoint is occupied.
std::optional<GridPath> astar(const OccupancyGrid& grid, Cell start, Cell goal);

/// True when every cell the segment passes through is free.
bool line_of_sight(const OccupancyGrid& grid, Vec2 a, Vec2 b);

/// Greedy shortcutting: from each kept point jump to the farthest point
/// still visible.
std::vector<Vec2> shortcut_path(const OccupancyGrid& grid, const std::vector<Vec2>& points);

/// Waypoints from start to goal: A* over cell centers, endpoints replaced by
/// the exact start and goal, then shortcut. Throws NoPathError.
std::vector<Vec2> plan_waypoints(const OccupancyGrid& grid, Vec2 start, Vec2 goal);

/// plan_waypoints after moving occupied endpoints to their nearest free
/// cell centers. Used for agents that have drifted into inflated space.
std::vector<Vec2> plan_waypoints_snapped(const OccupancyGrid& grid, Vec2 start, Vec2 goal);

}  // namespace socnav
