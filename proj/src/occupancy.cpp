#include "socnav/occupancy.hpp"

#include <cmath>
#include <deque>

#include "socnav/kernels.hpp"
#include "socnav/scene.hpp"

namespace socnav {

OccupancyGrid::OccupancyGrid(Bounds bounds, double resolution, int cols, int rows)
    : bounds_(bounds),
      resolution_(resolution),
      cols_(cols),
      rows_(rows),
      cells_(static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows), 0) {}

OccupancyGrid OccupancyGrid::covering(Bounds bounds, double resolution) {
  const int cols = std::max(1, static_cast<int>(std::ceil(bounds.width() / resolution - 1e-9)));
  const int rows = std::max(1, static_cast<int>(std::ceil(bounds.height() / resolution - 1e-9)));
  return OccupancyGrid(bounds, resolution, cols, rows);
}

Vec2 OccupancyGrid::center(Cell c) const {
  return {bounds_.min_x + (c.col + 0.5) * resolution_, bounds_.min_y + (c.row + 0.5) * resolution_};
}

Cell OccupancyGrid::cell_of(Vec2 p) const {
  return {static_cast<int>(std::floor((p.x - bounds_.min_x) / resolution_)),
          static_cast<int>(std::floor((p.y - bounds_.min_y) / resolution_))};
}

std::optional<Cell> OccupancyGrid::nearest_free(Vec2 p) const {
  Cell start = cell_of(p);
  start.col = std::clamp(start.col, 0, cols_ - 1);
  start.row = std::clamp(start.row, 0, rows_ - 1);
  if (free(start)) return start;
  std::vector<std::uint8_t> seen(cells_.size(), 0);
  std::deque<Cell> queue{start};
  seen[index(start)] = 1;
  std::optional<Cell> best;
  double best_d = 0.0;
  int best_ring = -1;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    const int ring = std::max(std::abs(c.col - start.col), std::abs(c.row - start.row));
    if (best_ring >= 0 && ring > best_ring + 1) break;
    if (free(c)) {
      const double d = distance(center(c), p);
      if (!best || d < best_d) {
        best = c;
        best_d = d;
        best_ring = ring;
      }
      continue;
    }
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        const Cell n{c.col + dc, c.row + dr};
        if (!in_range(n) || seen[index(n)]) continue;
        seen[index(n)] = 1;
        queue.push_back(n);
      }
    }
  }
  return best;
}

std::size_t OccupancyGrid::occupied_count() const {
  std::size_t n = 0;
  for (auto v : cells_) n += v != 0;
  return n;
}

OccupancyGrid rasterize_occupancy(const Scene& scene, double inflation) {
  auto grid = OccupancyGrid::covering(scene.bounds, scene.grid_resolution);
  rasterize_rows(scene, inflation, grid);
  return grid;
}

}  // namespace socnav
