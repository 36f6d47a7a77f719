#pragma once

// Data-parallel hot loops. Each kernel has an OpenMP version used by the
// simulator and a serial reference with identical per-element arithmetic;
// both must produce bit-identical results.

#include <span>
#include <vector>

#include "socnav/crowd_params.hpp"
#include "socnav/geometry.hpp"
#include "socnav/occupancy.hpp"

namespace socnav {

struct Scene;
struct Pedestrian;
struct ScanSpec;

struct AgentCircle {
  Vec2 position;
  double radius = 0.0;
};

void rasterize_rows(const Scene& scene, double inflation, OccupancyGrid& grid);
void rasterize_rows_serial(const Scene& scene, double inflation, OccupancyGrid& grid);

/// Social force on every pedestrian from the same immutable snapshot.
std::vector<Vec2> compute_forces(std::span<const Pedestrian> peds, const AgentCircle& robot, const Scene& scene,
                                 const SocialForceParams& params);
std::vector<Vec2> compute_forces_serial(std::span<const Pedestrian> peds, const AgentCircle& robot,
                                        const Scene& scene, const SocialForceParams& params);

/// One range per beam against obstacles, bounds and the given circles.
std::vector<double> cast_beams(Pose2D origin, std::span<const AgentCircle> circles, const Scene& scene,
                               const ScanSpec& spec);
std::vector<double> cast_beams_serial(Pose2D origin, std::span<const AgentCircle> circles, const Scene& scene,
                                      const ScanSpec& spec);

/// Below this many elements the parallel kernels run on one thread.
inline constexpr int kParallelThreshold = 64;

}  // namespace socnav
