#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "socnav/geometry.hpp"

namespace socnav {

struct Scene;

struct Cell {
  int col = 0;
  int row = 0;
  bool operator==(const Cell&) const = default;
};

/// Boolean occupancy over a scene's bounds. Row-major, row 0 at min_y.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(Bounds bounds, double resolution, int cols, int rows);
  /// Grid covering `bounds` at `resolution`, all cells free.
  static OccupancyGrid covering(Bounds bounds, double resolution);

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  double resolution() const { return resolution_; }
  const Bounds& bounds() const { return bounds_; }

  bool in_range(Cell c) const { return c.col >= 0 && c.row >= 0 && c.col < cols_ && c.row < rows_; }
  bool occupied(Cell c) const { return !in_range(c) || cells_[index(c)] != 0; }
  bool free(Cell c) const { return !occupied(c); }
  void set(Cell c, bool occ) { cells_[index(c)] = occ ? 1 : 0; }

  Vec2 center(Cell c) const;
  /// Cell containing p; may be out of range.
  Cell cell_of(Vec2 p) const;
  /// Nearest free cell to p by breadth-first search over grid distance.
  std::optional<Cell> nearest_free(Vec2 p) const;
  std::size_t occupied_count() const;

  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row) * cols_ + c.col; }
  const std::vector<std::uint8_t>& data() const { return cells_; }
  std::vector<std::uint8_t>& data() { return cells_; }

  bool operator==(const OccupancyGrid&) const = default;

 private:
  Bounds bounds_;
  double resolution_ = 1.0;
  int cols_ = 0;
  int rows_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// A cell is occupied iff its center lies within `inflation` of an obstacle
/// (boundary inclusive) or of the scene bounds, or outside the bounds.
OccupancyGrid rasterize_occupancy(const Scene& scene, double inflation);

}  // namespace socnav
