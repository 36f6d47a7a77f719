#include <doctest.h>

#include <cmath>
#include <set>

#include "../support.hpp"
#include "socnav/trial.hpp"

using namespace socnav;
using namespace socnav::test;

namespace {

TrialConfig lab_config(int peds, int episodes = 3, std::uint64_t seed = 7) {
  TrialConfig c;
  c.scene = "lab";
  c.robot = "jackal";
  c.episodes = episodes;
  c.master_seed = seed;
  c.crowd.count = peds;
  c.timeout = 20.0;
  return c;
}

EpisodeMetrics row(bool completed, double elapsed, double dist, std::optional<double> ped, std::int64_t pc,
                   std::int64_t sc) {
  EpisodeMetrics m;
  m.completed = completed;
  m.elapsed = elapsed;
  m.final_distance = dist;
  m.min_ped_distance = ped;
  m.ped_collisions = pc;
  m.static_collisions = sc;
  return m;
}

// Straight-line run under the acceleration limit, one tick at a time.
double straight_line_elapsed(double distance_to_cover, double v_max, double a_max, double dt) {
  double v = 0.0;
  double x = 0.0;
  int ticks = 0;
  while (x < distance_to_cover) {
    v = std::min(v + a_max * dt, v_max);
    x += v * dt;
    ++ticks;
  }
  return ticks * dt;
}

}  // namespace

TEST_SUITE("trial") {
  TEST_CASE("episode generation is a pure function of its inputs") {
    SceneResources res(load_scene("lab"));
    const TrialConfig c = lab_config(6);
    const EpisodeConfig a = generate_episode(c, 3, 42, res);
    const EpisodeConfig b = generate_episode(c, 3, 42, res);
    CHECK(a == b);
    CHECK(config_hash(a) == config_hash(b));
    CHECK(a.pedestrians.size() == 6);
    CHECK(a.robot_start != a.robot_goal);

    std::set<std::string> hashes;
    for (int i = 0; i < 100; ++i) hashes.insert(config_hash(generate_episode(c, i, 42, res)));
    CHECK(hashes.size() == 100);
    CHECK(config_hash(generate_episode(c, 3, 43, res)) != config_hash(a));

    const EpisodeConfig parsed = episode_config_from_json(Json::parse(episode_config_to_json(a).dump()));
    CHECK(parsed == a);
  }

  TEST_CASE("pedestrian count reaches the episode") {
    SceneResources res(load_scene("lab"));
    for (int n : {0, 4, 12}) CHECK(generate_episode(lab_config(n), 0, 1, res).pedestrians.size() == static_cast<std::size_t>(n));
  }

  TEST_CASE("idle robot times out with the full distance") {
    const Scene scene = open_scene({-10, -10, 10, 10}, 0.25);
    SceneResources res(scene);
    IdleController idle;
    const auto ep = corridor_episode(scene, jackal_spec(), {0, 0, 0}, {5, 0, 0}, 10.0);
    const EpisodeRecord rec = run_episode(ep, res, idle);
    CHECK_FALSE(rec.metrics.completed);
    CHECK(rec.metrics.elapsed == 10.0);
    CHECK(rec.metrics.final_distance == 5.0);
    CHECK_FALSE(rec.metrics.min_ped_distance.has_value());
    CHECK(rec.metrics.total_collisions() == 0);
    CHECK(rec.ticks.size() == static_cast<std::size_t>(std::llround(10.0 / 0.05)) + 1);
  }

  TEST_CASE("start inside the tolerance completes at once") {
    const Scene scene = open_scene({-10, -10, 10, 10}, 0.25);
    SceneResources res(scene);
    BaselineController builtin;
    const auto rec = run_episode(corridor_episode(scene, jackal_spec(), {0, 0, 0}, {0.3, 0, 0}, 10.0), res, builtin);
    CHECK(rec.metrics.completed);
    CHECK(rec.metrics.elapsed == 0.0);
    CHECK(rec.ticks.size() == 1);
  }

  TEST_CASE("open corridor run matches a straight-line estimate") {
    const Scene scene = open_scene({-20, -20, 20, 20}, 0.25);
    SceneResources res(scene);
    RobotSpec slow = jackal_spec();
    slow.v_max = 1.0;
    BaselineController builtin;
    // A tight tolerance so the whole 5 m is covered.
    const auto tight = run_episode(corridor_episode(scene, slow, {0, 0, 0}, {5, 0, 0}, 30.0, 0.01), res, builtin);
    CHECK(tight.metrics.completed);
    CHECK(tight.metrics.elapsed >= 5.0);
    CHECK(tight.metrics.elapsed <= 5.0 + 10 * 0.05);
    CHECK(std::abs(tight.metrics.elapsed - straight_line_elapsed(4.99, 1.0, slow.a_max, 0.05)) <= 0.05 + 1e-9);

    const auto rec = run_episode(corridor_episode(scene, jackal_spec(), {0, 0, 0}, {10, 0, 0}, 30.0), res, builtin);
    const double oracle = straight_line_elapsed(9.5, 2.0, jackal_spec().a_max, 0.05);
    CHECK(rec.metrics.completed);
    CHECK(std::abs(rec.metrics.elapsed - oracle) <= 0.05 + 1e-9);
    CHECK(rec.ticks.size() == static_cast<std::size_t>(std::llround(rec.metrics.elapsed / 0.05)) + 1);
  }

  TEST_CASE("count_collisions debounces continuous contact") {
    using K = ContactKind;
    const std::vector<std::vector<ContactEvent>> stream{
        {},
        {{K::pedestrian, 0, -0.1}},
        {{K::pedestrian, 0, 0.02}},  // still latched
        {{K::pedestrian, 0, -0.01}},
        {{K::pedestrian, 0, 0.1}},   // re-armed
        {{K::pedestrian, 0, -0.1}, {K::static_object, 2, -0.01}},
        {{K::pedestrian, 0, -0.1}, {K::static_object, 2, -0.01}},
    };
    CHECK(count_collisions(stream) == std::pair<std::int64_t, std::int64_t>{2, 1});
    CHECK(count_collisions({}) == std::pair<std::int64_t, std::int64_t>{0, 0});
  }

  TEST_CASE("replay reproduces recorded episodes") {
    SceneResources res(load_scene("lab"));
    BaselineController builtin;
    const TrialConfig c = lab_config(8, 3);
    for (int i = 0; i < 3; ++i) {
      const EpisodeRecord rec = run_episode(generate_episode(c, i, c.master_seed, res), res, builtin);
      const EpisodeRecord parsed = parse_record(record_to_string(rec));
      CHECK(record_to_string(parsed) == record_to_string(rec));
      const EpisodeMetrics first = replay(parsed, res);
      CHECK(metrics_difference(first, rec.metrics).empty());
      CHECK(metrics_difference(replay(parsed, res), first).empty());
      CHECK(metrics_difference(metrics_from_ticks(parsed), rec.metrics).empty());

      REQUIRE(rec.ticks.size() > 12);
      EpisodeRecord bad = parsed;
      bad.ticks[10].cmd->v += 0.25;
      try {
        replay(bad, res);
        FAIL("expected a mismatch");
      } catch (const ReplayMismatch& e) {
        CHECK(e.tick() == 10);
      }
    }
  }

  TEST_CASE("records from another engine are refused") {
    SceneResources res(load_scene("lab"));
    IdleController idle;
    const TrialConfig c = lab_config(0, 1);
    EpisodeRecord rec = run_episode(generate_episode(c, 0, 1, res), res, idle);
    rec.engine_version = "other";
    CHECK_THROWS_AS(replay(rec, res), IncompatibleRecord);
  }

  TEST_CASE("aggregate examples") {
    CHECK(aggregate_values({1, 2, 3}) == Aggregate{2.0, 1.0, 3});
    CHECK(aggregate_values({4, 4, 4}).stddev == 0.0);
    CHECK(aggregate_values({7}) == Aggregate{7.0, 0.0, 1});

    std::vector<EpisodeMetrics> rows{row(true, 10, 0.2, 1.0, 0, 0), row(true, 12, 0.3, std::nullopt, 1, 0),
                                     row(false, 60, 4.0, 0.5, 0, 2), row(true, 14, 0.1, 2.0, 0, 0),
                                     row(false, 60, 3.0, 0.0, 3, 0)};
    TrialReport r = aggregate(rows);
    r.scene = "lab";
    r.robot = "jackal";
    r.controller = "builtin";
    CHECK(r.completion_rate == 60);
    CHECK(r.min_ped_distance->n == 4);
    CHECK(r.collisions->mean == doctest::Approx(6.0 / 5));
    const std::string table = render_table(r);
    CHECK(table.find(std::string(kTableHeader)) != std::string::npos);
    CHECK(table.find(" 60% ") != std::string::npos);
    CHECK(table.find("over 5 episodes") != std::string::npos);

    rows[4].aborted = true;
    rows[4].abort_reason = "disconnect";
    const TrialReport with_abort = aggregate(rows);
    CHECK(with_abort.n == 4);
    CHECK(with_abort.aborted == 1);
    CHECK(with_abort.completion_rate == 75);
    CHECK(render_table(with_abort).find("(1 aborted, excluded)") != std::string::npos);

    const TrialReport none = aggregate({row(true, 1, 0.1, std::nullopt, 0, 0)});
    CHECK_FALSE(none.min_ped_distance.has_value());
    CHECK(render_table(none).find("n/a") != std::string::npos);
  }

  TEST_CASE("tsv round-trips exactly") {
    SceneResources res(load_scene("lab"));
    BaselineController builtin;
    const auto result = run_trial(lab_config(6, 4), builtin, res);
    const TrialReport parsed = parse_tsv(render_tsv(result.report));
    CHECK(parsed == result.report);
    CHECK(reaggregate(parsed) == result.report);
  }

  TEST_CASE("trials are byte-identical across runs") {
    std::string first_tsv;
    std::vector<std::string> first_records;
    for (int round = 0; round < 2; ++round) {
      SceneResources res(load_scene("lab"));
      BaselineController builtin;
      const auto result = run_trial(lab_config(6, 3, 99), builtin, res);
      std::vector<std::string> records;
      for (const auto& r : result.records) records.push_back(record_to_string(r));
      if (round == 0) {
        first_tsv = render_tsv(result.report);
        first_records = records;
      } else {
        CHECK(render_tsv(result.report) == first_tsv);
        CHECK(records == first_records);
      }
    }
  }

  TEST_CASE("stop request aborts the remaining episodes") {
    SceneResources res(load_scene("lab"));
    IdleController idle;
    TrialConfig c = lab_config(0, 3);
    c.timeout = 1.0;
    int seen = 0;
    TrialHooks hooks;
    hooks.on_episode = [&](const EpisodeRecord&) { ++seen; };
    hooks.stop_requested = [&] { return seen >= 1; };
    const auto result = run_trial(c, idle, res, hooks);
    REQUIRE(result.records.size() == 3);
    CHECK_FALSE(result.records[0].metrics.aborted);
    CHECK(result.records[1].metrics.abort_reason == "interrupt");
    CHECK(result.report.aborted == 2);
  }

  TEST_CASE("trial config files") {
    TrialConfig c = lab_config(5);
    c.scan.beam_count = 180;
    CHECK(trial_config_from_json(trial_config_to_json(c)).scan.beam_count == 180);
    CHECK(trial_config_from_json(Json::parse("{}")).episodes == 10);
    CHECK_THROWS_AS(trial_config_from_json(Json::parse(R"({"episodes": -1})")), ConfigError);
    CHECK_THROWS_AS(trial_config_from_json(Json::parse(R"({"timeout": "x"})")), ConfigError);
    CHECK_THROWS_AS(make_local_controller(ControllerKind::external), ConfigError);
  }
}
