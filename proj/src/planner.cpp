#include "socnav/planner.hpp"

#include <cmath>
#include <limits>
#include <queue>

namespace socnav {

namespace {

constexpr int kDc[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDr[8] = {0, 0, 1, -1, 1, -1, 1, -1};

double octile(Cell a, Cell b) {
  const int dx = std::abs(a.col - b.col);
  const int dy = std::abs(a.row - b.row);
  return std::max(dx, dy) + (kSqrt2 - 1.0) * std::min(dx, dy);
}

struct OpenEntry {
  double f;
  double g;
  std::size_t index;
  bool operator>(const OpenEntry& o) const {
    if (f != o.f) return f > o.f;
    if (g != o.g) return g < o.g;
    return index > o.index;
  }
};

}  // namespace

std::optional<GridPath> astar(const OccupancyGrid& grid, Cell start, Cell goal) {
  if (grid.occupied(start) || grid.occupied(goal)) return std::nullopt;
  const std::size_t n = static_cast<std::size_t>(grid.cols()) * grid.rows();
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;

  const std::size_t s = grid.index(start);
  const std::size_t t = grid.index(goal);
  g[s] = 0.0;
  open.push({octile(start, goal), 0.0, s});
  while (!open.empty()) {
    const OpenEntry cur = open.top();
    open.pop();
    if (closed[cur.index]) continue;
    closed[cur.index] = 1;
    if (cur.index == t) break;
    const Cell c{static_cast<int>(cur.index % grid.cols()), static_cast<int>(cur.index / grid.cols())};
    for (int k = 0; k < 8; ++k) {
      const Cell nb{c.col + kDc[k], c.row + kDr[k]};
      if (grid.occupied(nb)) continue;
      const bool diagonal = k >= 4;
      if (diagonal && (grid.occupied({c.col + kDc[k], c.row}) || grid.occupied({c.col, c.row + kDr[k]}))) continue;
      const std::size_t ni = grid.index(nb);
      if (closed[ni]) continue;
      const double cand = g[cur.index] + (diagonal ? kSqrt2 : 1.0);
      if (cand < g[ni]) {
        g[ni] = cand;
        parent[ni] = static_cast<std::int64_t>(cur.index);
        open.push({cand + octile(nb, goal), cand, ni});
      }
    }
  }
  if (!closed[t]) return std::nullopt;

  GridPath path;
  for (std::int64_t i = static_cast<std::int64_t>(t); i >= 0; i = parent[static_cast<std::size_t>(i)]) {
    path.cells.push_back({static_cast<int>(i % grid.cols()), static_cast<int>(i / grid.cols())});
  }
  std::reverse(path.cells.begin(), path.cells.end());
  for (std::size_t i = 1; i < path.cells.size(); ++i) {
    const bool diagonal =
        path.cells[i].col != path.cells[i - 1].col && path.cells[i].row != path.cells[i - 1].row;
    (diagonal ? path.diagonal_moves : path.straight_moves) += 1;
  }
  return path;
}

bool line_of_sight(const OccupancyGrid& grid, Vec2 a, Vec2 b) {
  // Voxel traversal in grid coordinates.
  const double res = grid.resolution();
  const double ax = (a.x - grid.bounds().min_x) / res;
  const double ay = (a.y - grid.bounds().min_y) / res;
  const double bx = (b.x - grid.bounds().min_x) / res;
  const double by = (b.y - grid.bounds().min_y) / res;
  Cell c{static_cast<int>(std::floor(ax)), static_cast<int>(std::floor(ay))};
  const Cell end{static_cast<int>(std::floor(bx)), static_cast<int>(std::floor(by))};
  if (grid.occupied(c)) return false;

  const double dx = bx - ax;
  const double dy = by - ay;
  const int step_c = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_r = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double delta_x = step_c != 0 ? std::abs(1.0 / dx) : kInf;
  const double delta_y = step_r != 0 ? std::abs(1.0 / dy) : kInf;
  double t_x = step_c > 0 ? (std::floor(ax) + 1.0 - ax) * delta_x
                          : (step_c < 0 ? (ax - std::floor(ax)) * delta_x : kInf);
  double t_y = step_r > 0 ? (std::floor(ay) + 1.0 - ay) * delta_y
                          : (step_r < 0 ? (ay - std::floor(ay)) * delta_y : kInf);

  const int max_steps = std::abs(end.col - c.col) + std::abs(end.row - c.row) + 2;
  for (int i = 0; i < max_steps && !(c == end); ++i) {
    if (t_x < t_y) {
      if (t_x > 1.0) break;
      c.col += step_c;
      t_x += delta_x;
    } else if (t_y < t_x) {
      if (t_y > 1.0) break;
      c.row += step_r;
      t_y += delta_y;
    } else {
      if (t_x > 1.0) break;
      // Passing exactly through a corner: both side cells must be free.
      if (grid.occupied({c.col + step_c, c.row}) || grid.occupied({c.col, c.row + step_r})) return false;
      c.col += step_c;
      c.row += step_r;
      t_x += delta_x;
      t_y += delta_y;
    }
    if (grid.occupied(c)) return false;
  }
  return true;
}

std::vector<Vec2> shortcut_path(const OccupancyGrid& grid, const std::vector<Vec2>& points) {
  if (points.size() <= 2) return points;
  std::vector<Vec2> out{points.front()};
  std::size_t i = 0;
  while (i + 1 < points.size()) {
    std::size_t j = points.size() - 1;
    while (j > i + 1 && !line_of_sight(grid, points[i], points[j])) --j;
    out.push_back(points[j]);
    i = j;
  }
  return out;
}

std::vector<Vec2> plan_waypoints(const OccupancyGrid& grid, Vec2 start, Vec2 goal) {
  if (start == goal) return {start};
  const Cell s = grid.cell_of(start);
  const Cell t = grid.cell_of(goal);
  if (grid.occupied(s)) throw NoPathError("start cell is occupied");
  if (grid.occupied(t)) throw NoPathError("goal cell is occupied");
  const auto path = astar(grid, s, t);
  if (!path) throw NoPathError("goal unreachable");

  std::vector<Vec2> points{start};
  for (std::size_t i = 1; i + 1 < path->cells.size(); ++i) points.push_back(grid.center(path->cells[i]));
  points.push_back(goal);
  return shortcut_path(grid, points);
}

std::vector<Vec2> plan_waypoints_snapped(const OccupancyGrid& grid, Vec2 start, Vec2 goal) {
  const auto snap = [&](Vec2 p) {
    if (grid.free(grid.cell_of(p))) return p;
    const auto c = grid.nearest_free(p);
    if (!c) throw NoPathError("no free cell in grid");
    return grid.center(*c);
  };
  const Vec2 s = snap(start);
  const Vec2 t = snap(goal);
  auto path = plan_waypoints(grid, s, t);
  if (!(s == start)) path.insert(path.begin(), start);
  if (!(t == goal)) path.push_back(goal);
  return path;
}

}  // namespace socnav
