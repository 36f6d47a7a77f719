#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "socnav/bridge.hpp"
#include "socnav/errors.hpp"
#include "socnav/transport.hpp"
#include "socnav/trial.hpp"

namespace socnav {

namespace {

namespace fs = std::filesystem;

struct TrialFlags {
  std::optional<std::string> config;
  std::optional<std::string> scene;
  std::optional<std::string> robot;
  std::optional<std::string> controller;
  std::optional<int> episodes;
  std::optional<std::uint64_t> seed;
  std::optional<int> ped_count;
  std::optional<double> timeout;
  std::optional<double> goal_tolerance;
  std::string out_dir = "out";
};

void add_trial_flags(CLI::App& cmd, TrialFlags& f) {
  cmd.add_option("--config", f.config, "trial config file (JSON)");
  cmd.add_option("--scene", f.scene, "scene id (lab, city)");
  cmd.add_option("--robot", f.robot, "robot id (jackal, warthog)");
  cmd.add_option("--controller", f.controller, "builtin | idle | teleop | external");
  cmd.add_option("--episodes", f.episodes, "number of episodes");
  cmd.add_option("--seed", f.seed, "master seed");
  cmd.add_option("--ped-count", f.ped_count, "number of pedestrians");
  cmd.add_option("--timeout", f.timeout, "episode timeout in seconds");
  cmd.add_option("--goal-tolerance", f.goal_tolerance, "goal tolerance in meters");
  cmd.add_option("--out", f.out_dir, "output directory")->capture_default_str();
}

TrialConfig resolve_config(const TrialFlags& f) {
  TrialConfig c = f.config ? load_trial_config(*f.config) : TrialConfig{};
  if (f.scene) c.scene = *f.scene;
  if (f.robot) c.robot = *f.robot;
  if (f.controller) c.controller = controller_kind_from_string(*f.controller);
  if (f.episodes) c.episodes = *f.episodes;
  if (f.seed) c.master_seed = *f.seed;
  if (f.ped_count) c.crowd.count = *f.ped_count;
  if (f.timeout) c.timeout = *f.timeout;
  if (f.goal_tolerance) c.goal_tolerance = *f.goal_tolerance;
  validate_trial_config(c);
  require_robot(c.robot);
  return c;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void log_episode(std::ostream& err, const EpisodeRecord& r, int total) {
  const auto& m = r.metrics;
  err << "episode " << (r.config.episode_id + 1) << "/" << total << ": ";
  if (m.aborted) {
    err << "aborted (" << m.abort_reason << ")";
  } else if (m.completed) {
    err << "completed in " << fmt("%.2f", m.elapsed) << " s";
  } else {
    err << "timed out, " << fmt("%.2f", m.final_distance) << " m from goal";
  }
  err << ", collisions " << m.ped_collisions << " ped / " << m.static_collisions << " static\n";
}

TrialHooks trial_hooks(std::ostream& err, const fs::path& out_dir, int total, const std::atomic<bool>* interrupt) {
  TrialHooks hooks;
  hooks.on_episode = [&err, out_dir, total](const EpisodeRecord& r) {
    // Written as they finish so an interrupted trial keeps what it has.
    write_record(record_path(out_dir, r.config.episode_id), r);
    log_episode(err, r, total);
  };
  hooks.stop_requested = [interrupt] { return interrupt != nullptr && interrupt->load(); };
  return hooks;
}

int cmd_run(const TrialFlags& flags, std::ostream& out, std::ostream& err, const std::atomic<bool>* interrupt) {
  const TrialConfig config = resolve_config(flags);
  if (config.episodes < 1) throw ConfigError("run needs at least one episode");
  auto controller = make_local_controller(config.controller);
  SceneResources resources(load_scene(config.scene));
  const fs::path out_dir(flags.out_dir);
  fs::create_directories(out_dir / "records");
  const TrialResult result =
      run_trial(config, *controller, resources, trial_hooks(err, out_dir, config.episodes, interrupt));
  write_report_files(out_dir, result.report);
  out << render_table(result.report);
  err << "wrote " << result.records.size() << " records and report to " << out_dir.string() << "\n";
  if (interrupt != nullptr && interrupt->load()) {
    err << "interrupted\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_replay(const std::string& path, std::ostream& out, std::ostream& err) {
  if (!fs::exists(path)) throw ConfigError("no such record file: " + path);
  const EpisodeRecord record = read_record(path);
  SceneResources resources(load_scene(record.config.scene));
  try {
    const EpisodeMetrics m = replay(record, resources);
    out << "REPLAY OK\n" << metrics_to_json(m).dump() << "\n";
    return kExitOk;
  } catch (const ReplayMismatch& e) {
    err << "REPLAY MISMATCH at tick " << e.tick() << ": field '" << e.field() << "' differs\n";
    return kExitMismatch;
  }
}

std::vector<fs::path> find_records(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<fs::path> found;
  for (const fs::path& d : {dir, dir / "records"}) {
    if (!fs::is_directory(d)) continue;
    for (const auto& e : fs::directory_iterator(d)) {
      if (e.is_regular_file() && e.path().extension() == ".jsonl") found.push_back(e.path());
    }
  }
  std::sort(found.begin(), found.end());
  return found;
}

std::optional<std::string> stored_controller_label(const fs::path& dir) {
  std::ifstream in(dir / "report.tsv");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#controller\t", 0) == 0) return line.substr(12);
  }
  return std::nullopt;
}

int cmd_report(const std::string& dir_arg, bool tsv, std::ostream& out, std::ostream& err) {
  const fs::path dir(dir_arg);
  const auto files = find_records(dir);
  if (files.empty()) throw ConfigError("no episode records in " + dir.string());
  std::vector<EpisodeRecord> records;
  for (const auto& f : files) records.push_back(read_record(f));
  std::sort(records.begin(), records.end(),
            [](const EpisodeRecord& a, const EpisodeRecord& b) { return a.config.episode_id < b.config.episode_id; });
  std::vector<EpisodeMetrics> rows;
  int mismatches = 0;
  for (const auto& r : records) {
    const EpisodeMetrics m = metrics_from_ticks(r);
    const std::string diff = metrics_difference(m, r.metrics);
    if (!diff.empty()) {
      err << "episode " << r.config.episode_id << ": recomputed " << diff << " differs from stored value\n";
      ++mismatches;
    }
    rows.push_back(m);
  }
  TrialReport report = aggregate(rows);
  report.episode_ids.clear();
  for (const auto& r : records) report.episode_ids.push_back(r.config.episode_id);
  report.scene = records.front().config.scene;
  report.robot = records.front().config.robot.name;
  report.controller = stored_controller_label(dir).value_or("unknown");
  out << (tsv ? render_tsv(report) : render_table(report));
  return mismatches > 0 ? kExitMismatch : kExitOk;
}

std::optional<fs::path> default_ui_dir() {
  if (const char* env = std::getenv("SOCNAV_UI_DIR"); env != nullptr && *env != '\0') return fs::path(env);
#ifdef SOCNAV_UI_DIR
  if (fs::is_directory(SOCNAV_UI_DIR)) return fs::path(SOCNAV_UI_DIR);
#endif
  return std::nullopt;
}

struct ServeFlags {
  std::string mode = "lockstep";
  int port = kDefaultPort;
  std::optional<std::string> ui_dir;
  std::optional<std::string> port_file;
};

int cmd_serve(const TrialFlags& flags, const ServeFlags& sf, std::ostream& out, std::ostream& err,
              const std::atomic<bool>* interrupt) {
  TrialConfig config = resolve_config(flags);
  const auto mode = session_mode_from_string(sf.mode);
  if (!mode) throw ConfigError("unknown mode '" + sf.mode + "' (expected lockstep or realtime)");
  if (sf.port < 0 || sf.port > 65535) throw ConfigError("port out of range: " + std::to_string(sf.port));
  // The label in the report names who drove, not the local default.
  if (config.controller == ControllerKind::builtin || config.controller == ControllerKind::idle) {
    config.controller = *mode == SessionMode::lockstep ? ControllerKind::external : ControllerKind::teleop;
  }
  SceneResources resources(load_scene(config.scene));
  ServeOptions opts;
  opts.port = static_cast<std::uint16_t>(sf.port);
  opts.mode = *mode;
  opts.ui_dir = sf.ui_dir ? std::optional<fs::path>(*sf.ui_dir) : default_ui_dir();
  opts.interrupt = interrupt;
  BridgeServer server(config, resources, opts);
  err << "listening on port " << server.port() << " (" << sf.mode << ")\n";
  if (sf.port_file) {
    std::ofstream pf(*sf.port_file);
    pf << server.port() << "\n";
  }
  const fs::path out_dir(flags.out_dir);
  fs::create_directories(out_dir / "records");
  const TrialResult result = server.run(trial_hooks(err, out_dir, config.episodes, interrupt));
  write_report_files(out_dir, result.report);
  out << render_table(result.report);
  if (interrupt != nullptr && interrupt->load()) {
    err << "interrupted; partial records flushed to " << out_dir.string() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::atomic<bool>* interrupt) {
  CLI::App app{"Social navigation benchmark simulator", "socnav"};
  app.require_subcommand(1);

  TrialFlags run_flags;
  auto* run = app.add_subcommand("run", "run a trial with an in-process controller");
  add_trial_flags(*run, run_flags);

  std::string record_file;
  auto* rep = app.add_subcommand("replay", "re-simulate a record and check it bit for bit");
  rep->add_option("record", record_file, "episode record (.jsonl)")->required();

  std::string report_dir;
  bool report_tsv = false;
  auto* report = app.add_subcommand("report", "recompute metrics from records and print the table");
  report->add_option("dir", report_dir, "trial output or records directory")->required();
  report->add_flag("--tsv", report_tsv, "print the machine-readable report instead of the table");

  TrialFlags serve_flags;
  ServeFlags sf;
  auto* serve = app.add_subcommand("serve", "serve a trial to an external controller or teleop client");
  add_trial_flags(*serve, serve_flags);
  serve->add_option("--mode", sf.mode, "lockstep | realtime")->capture_default_str();
  serve->add_option("--port", sf.port, "listen port (0 picks a free one)")->capture_default_str();
  serve->add_option("--ui-dir", sf.ui_dir, "directory served under /ui");
  serve->add_option("--port-file", sf.port_file, "write the bound port to this file");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front(); sub != nullptr) {
      err << sub->help();
    } else {
      err << app.help();
    }
    return kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(run_flags, out, err, interrupt);
    if (rep->parsed()) return cmd_replay(record_file, out, err);
    if (report->parsed()) return cmd_report(report_dir, report_tsv, out, err);
    if (serve->parsed()) return cmd_serve(serve_flags, sf, out, err, interrupt);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace socnav
