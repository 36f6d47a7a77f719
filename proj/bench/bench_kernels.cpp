// Times each OpenMP kernel against its serial reference on the city scene.
// Usage: bench_kernels [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "socnav/crowd.hpp"
#include "socnav/kernels.hpp"
#include "socnav/rng.hpp"
#include "socnav/scene.hpp"
#include "socnav/sensing.hpp"

using namespace socnav;

namespace {

double seconds_per_call(int repeats, const std::function<void()>& f) {
  f();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / repeats;
}

void row(const std::string& name, int repeats, const std::function<void()>& par, const std::function<void()>& ser,
         bool identical) {
  const double tp = seconds_per_call(repeats, par);
  const double ts = seconds_per_call(repeats, ser);
  std::printf("%-28s %12.3f %12.3f %8.2fx  %s\n", name.c_str(), ts * 1e3, tp * 1e3, ts / tp,
              identical ? "identical" : "DIFFERENT");
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 20;
  const Scene scene = load_scene("city");
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-28s %12s %12s %9s\n", "kernel", "serial ms", "parallel ms", "speedup");

  for (double res : {0.25, 0.1}) {
    OccupancyGrid a = OccupancyGrid::covering(scene.bounds, res);
    OccupancyGrid b = a;
    rasterize_rows(scene, 0.7, a);
    rasterize_rows_serial(scene, 0.7, b);
    row("rasterize city @" + std::to_string(res).substr(0, 4), std::max(1, repeats / 10),
        [&] { rasterize_rows(scene, 0.7, a); }, [&] { rasterize_rows_serial(scene, 0.7, b); }, a.data() == b.data());
  }

  const OccupancyGrid grid = rasterize_occupancy(scene, kPedestrianRadius);
  const AgentCircle robot{{30.0, 30.0}, 0.25};
  for (int count : {32, 108}) {
    CrowdConfig cc;
    cc.count = count;
    Rng rng(42);
    const auto peds = spawn_crowd(scene, cc, grid, rng, 7, {});
    const SocialForceParams sp;
    row("forces " + std::to_string(count) + " peds", repeats * 10,
        [&] { compute_forces(peds, robot, scene, sp); }, [&] { compute_forces_serial(peds, robot, scene, sp); },
        compute_forces(peds, robot, scene, sp) == compute_forces_serial(peds, robot, scene, sp));

    std::vector<AgentCircle> circles;
    for (const auto& p : peds) circles.push_back({p.pose.position(), p.radius});
    for (int beams : {360, 1440}) {
      ScanSpec spec;
      spec.beam_count = beams;
      const Pose2D origin{30.0, 30.0, 0.3};
      row("lidar " + std::to_string(beams) + " beams, " + std::to_string(count) + " peds", repeats,
          [&] { cast_beams(origin, circles, scene, spec); }, [&] { cast_beams_serial(origin, circles, scene, spec); },
          cast_beams(origin, circles, scene, spec) == cast_beams_serial(origin, circles, scene, spec));
    }
  }
  return 0;
}
