#include <doctest.h>

#include <queue>
#include <random>

#include "../support.hpp"
#include "socnav/planner.hpp"

using namespace socnav;
using namespace socnav::test;

namespace {

struct Moves {
  int straight = 0;
  int diagonal = 0;
};

// Plain Dijkstra over the same move set (no corner cutting). Returns the
// move counts of one optimal path.
std::optional<Moves> dijkstra(const OccupancyGrid& g, Cell s, Cell t) {
  const int n = g.cols() * g.rows();
  std::vector<double> dist(n, 1e300);
  std::vector<Moves> moves(n);
  std::vector<bool> done(n, false);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  auto id = [&](Cell c) { return c.row * g.cols() + c.col; };
  dist[id(s)] = 0;
  pq.push({0, id(s)});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = true;
    const Cell c{u % g.cols(), u / g.cols()};
    if (c == t) return moves[u];
    for (int dc = -1; dc <= 1; ++dc) {
      for (int dr = -1; dr <= 1; ++dr) {
        if (dc == 0 && dr == 0) continue;
        const Cell nb{c.col + dc, c.row + dr};
        if (g.occupied(nb)) continue;
        const bool diag = dc != 0 && dr != 0;
        if (diag && (g.occupied({c.col + dc, c.row}) || g.occupied({c.col, c.row + dr}))) continue;
        const double nd = d + (diag ? std::sqrt(2.0) : 1.0);
        if (nd < dist[id(nb)]) {
          dist[id(nb)] = nd;
          moves[id(nb)] = moves[u];
          (diag ? moves[id(nb)].diagonal : moves[id(nb)].straight) += 1;
          pq.push({nd, id(nb)});
        }
      }
    }
  }
  return std::nullopt;
}

OccupancyGrid random_grid(std::mt19937_64& gen, int n, double density) {
  OccupancyGrid g({0, 0, static_cast<double>(n), static_cast<double>(n)}, 1.0, n, n);
  std::bernoulli_distribution occ(density);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) g.set({c, r}, occ(gen));
  }
  return g;
}

bool path_is_clear(const OccupancyGrid& g, const std::vector<Vec2>& path) {
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (!line_of_sight(g, path[i - 1], path[i])) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("planner") {
  TEST_CASE("plan_waypoints examples") {
    const Scene s = open_scene({-10, -10, 10, 10}, 0.5);
    const OccupancyGrid g = rasterize_occupancy(s, 0.0);
    const auto same = plan_waypoints(g, {1, 1}, {1, 1});
    CHECK(same == std::vector<Vec2>{{1, 1}});
    const auto straight = plan_waypoints(g, {0, 0}, {5, 0});
    CHECK(straight == std::vector<Vec2>{{0, 0}, {5, 0}});
  }

  TEST_CASE("wall with one gap matches Dijkstra") {
    Scene s = open_scene({0, 0, 20, 20}, 0.5);
    s.obstacles = {rect(9.5, 0, 10.5, 8), rect(9.5, 10, 10.5, 20)};
    const OccupancyGrid g = rasterize_occupancy(s, 0.0);
    const Cell a = g.cell_of({2, 2});
    const Cell b = g.cell_of({18, 2});
    const auto path = astar(g, a, b);
    const auto ref = dijkstra(g, a, b);
    REQUIRE(path);
    REQUIRE(ref);
    CHECK(path->straight_moves == ref->straight);
    CHECK(path->diagonal_moves == ref->diagonal);
    const auto wp = plan_waypoints(g, {2, 2}, {18, 2});
    CHECK(wp.front() == Vec2{2, 2});
    CHECK(wp.back() == Vec2{18, 2});
    CHECK(wp.size() >= 3);
    CHECK(path_is_clear(g, wp));
  }

  TEST_CASE("A* cost equals Dijkstra on random grids") {
    std::mt19937_64 gen(99);
    for (int t = 0; t < 20; ++t) {
      const OccupancyGrid g = random_grid(gen, 32, 0.25);
      std::uniform_int_distribution<int> u(0, 31);
      Cell a{u(gen), u(gen)}, b{u(gen), u(gen)};
      if (g.occupied(a) || g.occupied(b)) continue;
      const auto path = astar(g, a, b);
      const auto ref = dijkstra(g, a, b);
      CHECK(path.has_value() == ref.has_value());
      if (!path || !ref) continue;
      CHECK(path->straight_moves == ref->straight);
      CHECK(path->diagonal_moves == ref->diagonal);
      // Path is connected, free and free of corner cuts.
      for (std::size_t i = 1; i < path->cells.size(); ++i) {
        const Cell p = path->cells[i - 1], q = path->cells[i];
        CHECK(std::abs(p.col - q.col) <= 1);
        CHECK(std::abs(p.row - q.row) <= 1);
        CHECK(g.free(q));
        if (p.col != q.col && p.row != q.row) {
          CHECK(g.free({q.col, p.row}));
          CHECK(g.free({p.col, q.row}));
        }
      }
    }
  }

  TEST_CASE("shortcut paths stay collision-free") {
    std::mt19937_64 gen(5);
    for (int t = 0; t < 30; ++t) {
      const OccupancyGrid g = random_grid(gen, 40, 0.2);
      std::uniform_real_distribution<double> u(0.5, 39.5);
      const Vec2 a{u(gen), u(gen)}, b{u(gen), u(gen)};
      if (g.occupied(g.cell_of(a)) || g.occupied(g.cell_of(b))) continue;
      try {
        const auto wp = plan_waypoints(g, a, b);
        CHECK(wp.front() == a);
        CHECK(wp.back() == b);
        CHECK(path_is_clear(g, wp));
      } catch (const NoPathError&) {
        CHECK_FALSE(astar(g, g.cell_of(a), g.cell_of(b)).has_value());
      }
    }
  }

  TEST_CASE("unreachable and blocked endpoints raise NoPathError") {
    Scene s = open_scene({0, 0, 10, 10}, 0.5);
    s.obstacles = {rect(4.5, 0, 5.5, 10)};
    const OccupancyGrid g = rasterize_occupancy(s, 0.0);
    CHECK_THROWS_AS(plan_waypoints(g, {1, 1}, {9, 9}), NoPathError);
    CHECK_THROWS_AS(plan_waypoints(g, {5, 5}, {9, 9}), NoPathError);
  }

  TEST_CASE("line_of_sight refuses to slip between diagonal neighbours") {
    OccupancyGrid g({0, 0, 4, 4}, 1.0, 4, 4);
    g.set({1, 2}, true);
    g.set({2, 1}, true);
    CHECK_FALSE(line_of_sight(g, {1.5, 1.5}, {2.5, 2.5}));
    CHECK(line_of_sight(g, {0.5, 0.5}, {0.5, 3.5}));
  }

  TEST_CASE("snapped planning starts from the nearest free cell") {
    Scene s = open_scene({0, 0, 10, 10}, 0.5);
    s.obstacles = {rect(4, 4, 6, 6)};
    const OccupancyGrid g = rasterize_occupancy(s, 0.0);
    const auto wp = plan_waypoints_snapped(g, {4.1, 5}, {9, 9});
    CHECK(wp.front() == Vec2{4.1, 5});
    CHECK(wp.back() == Vec2{9, 9});
    REQUIRE(wp.size() >= 3);
    CHECK(g.free(g.cell_of(wp[1])));
    CHECK(distance(wp[0], wp[1]) < 1.0);
  }
}
