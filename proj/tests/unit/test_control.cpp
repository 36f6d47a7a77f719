#include <doctest.h>

#include <cmath>
#include <random>

#include "../support.hpp"
#include "socnav/control.hpp"

using namespace socnav;
using namespace socnav::test;

namespace {

EpisodeStart start_in(const Scene& scene, RobotSpec robot, Pose2D start, Pose2D goal) {
  EpisodeStart e;
  e.scene = &scene;
  e.robot = robot;
  e.start = start;
  e.goal = goal;
  return e;
}

Observation open_obs(Pose2D pose, Pose2D goal, const ScanSpec& spec, std::int64_t tick = 0) {
  Observation o;
  o.tick = tick;
  o.pose = pose;
  o.goal = goal;
  o.scan.assign(spec.beam_count, spec.r_max);
  return o;
}

}  // namespace

TEST_SUITE("control") {
  TEST_CASE("baseline examples") {
    const Scene scene = open_scene({-20, -20, 20, 20}, 0.25);
    const BaselineGrids grids = make_baseline_grids(scene, jackal_spec(), BaselineParams{});

    EpisodeStart at_goal = start_in(scene, jackal_spec(), {3, 3, 0}, {3, 3, 0});
    BaselineMemory m0;
    const auto done = baseline_decide(open_obs({3, 3, 0}, {3, 3, 0}, at_goal.scan), grids, m0, at_goal);
    CHECK(done.done_hint);
    CHECK(done.twist == Twist{0, 0});

    EpisodeStart corridor = start_in(scene, jackal_spec(), {0, 0, 0}, {10, 0, 0});
    BaselineMemory m1;
    const auto go = baseline_decide(open_obs({0, 0, 0}, {10, 0, 0}, corridor.scan), grids, m1, corridor);
    CHECK_FALSE(go.done_hint);
    CHECK(go.twist.v == doctest::Approx(std::min(2.0, 1.0 * 2.5)));
    CHECK(std::abs(go.twist.w) < 1e-9);

    Observation close = open_obs({0, 0, 0}, {10, 0, 0}, corridor.scan);
    close.scan[0] = 0.5;
    BaselineMemory m2;
    CHECK(baseline_decide(close, grids, m2, corridor).twist.v == 0.0);
  }

  TEST_CASE("forward sector minimum") {
    ScanSpec spec;
    Observation o = open_obs({0, 0, 0}, {5, 0, 0}, spec);
    o.scan[29] = 1.0;
    o.scan[90] = 0.2;
    CHECK(forward_sector_min(o, spec, 0.5235987755982988) == 1.0);
    o.scan[340] = 0.7;
    CHECK(forward_sector_min(o, spec, 0.5235987755982988) == 0.7);
  }

  TEST_CASE("baseline commands stay inside the robot envelope") {
    const Scene lab = load_scene("lab");
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> ux(0.5, 14.5), uy(0.5, 9.5), th(-3.14, 3.14), r(0.1, 30.0);
    const BaselineParams params;
    for (const RobotSpec& robot : {jackal_spec(), warthog_spec()}) {
      const BaselineGrids grids = make_baseline_grids(lab, robot, params);
      for (int t = 0; t < 200; ++t) {
        EpisodeStart e = start_in(lab, robot, lab.robot_anchors[t % 9], lab.robot_anchors[(t + 4) % 9]);
        Observation o = open_obs({ux(gen), uy(gen), th(gen)}, e.goal, e.scan, t);
        for (double& x : o.scan) x = r(gen);
        BaselineMemory m;
        const auto d = baseline_decide(o, grids, m, e, params);
        CHECK(d.twist.v >= 0.0);
        CHECK(d.twist.v <= robot.v_max);
        CHECK(std::abs(d.twist.w) <= robot.w_max);
        if (forward_sector_min(o, e.scan, params.sector_half_angle) < params.stop_range) CHECK(d.twist.v == 0.0);
        BaselineMemory again;
        CHECK(baseline_decide(o, grids, again, e, params).twist == d.twist);
      }
    }
  }

  TEST_CASE("teleop dead-man") {
    CHECK(teleop_decide(std::nullopt, 0).twist == Twist{0, 0});
    CHECK(teleop_decide(Twist{1.0, 0.5}, 0).twist == Twist{1.0, 0.5});
    CHECK(teleop_decide(Twist{1.0, 0.5}, kDeadManTicks).twist == Twist{1.0, 0.5});
    CHECK(teleop_decide(Twist{1.0, 0.5}, kDeadManTicks + 1).twist == Twist{0, 0});
    for (std::int64_t s = 0; s < 100; ++s) {
      const Twist got = teleop_decide(Twist{0.7, -0.2}, s).twist;
      CHECK((s > kDeadManTicks) == (got == Twist{0, 0}));
    }
  }

  TEST_CASE("command cell and teleop controller") {
    auto cell = std::make_shared<CommandCell>();
    CHECK_FALSE(cell->get().first.has_value());
    cell->put({0.5, 0.1});
    const auto [cmd, serial] = cell->get();
    CHECK(cmd == Twist{0.5, 0.1});
    CHECK(serial == 1);
    cell->clear();
    CHECK_FALSE(cell->get().first.has_value());

    TeleopController teleop(cell);
    const Scene scene = open_scene({-5, -5, 5, 5});
    teleop.begin_episode(start_in(scene, jackal_spec(), {0, 0, 0}, {1, 0, 0}));
    Observation o;
    cell->put({0.4, 0.0});
    for (std::int64_t t = 0; t <= 30; ++t) {
      o.tick = t;
      const Twist got = teleop.decide(o).twist;
      CHECK(got == (t <= kDeadManTicks ? Twist{0.4, 0.0} : Twist{0, 0}));
    }
    // A fresh command re-arms it.
    cell->put({0.2, 0.0});
    o.tick = 31;
    CHECK(teleop.decide(o).twist == Twist{0.2, 0.0});
  }

  TEST_CASE("idle controller") {
    IdleController idle;
    Observation o;
    CHECK(idle.decide(o).twist == Twist{0, 0});
    CHECK_FALSE(idle.decide(o).done_hint);
  }
}
