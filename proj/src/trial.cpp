#include <cstdio>
#include <fstream>

#include "socnav/errors.hpp"
#include "socnav/trial.hpp"

namespace socnav {

namespace {

/// Aborts every episode at tick 0; stands in once a stop is requested.
class InterruptedController final : public Controller {
 public:
  void begin_episode(const EpisodeStart&) override { throw ControllerAborted("interrupt", "trial interrupted"); }
  ControllerDecision decide(const Observation&) override { return {}; }
};

}  // namespace

std::unique_ptr<Controller> make_local_controller(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::builtin: return std::make_unique<BaselineController>();
    case ControllerKind::idle: return std::make_unique<IdleController>();
    case ControllerKind::teleop:
    case ControllerKind::external: break;
  }
  throw ConfigError("controller '" + std::string(to_string(kind)) +
                    "' needs a connected client; use the serve command");
}

TrialResult run_trial(const TrialConfig& config, Controller& controller, SceneResources& resources,
                      const TrialHooks& hooks) {
  validate_trial_config(config);
  TrialResult result;
  std::vector<EpisodeMetrics> rows;
  for (int i = 0; i < config.episodes; ++i) {
    const EpisodeConfig ep = generate_episode(config, i, config.master_seed, resources);
    EpisodeRecord record;
    if (hooks.stop_requested && hooks.stop_requested()) {
      InterruptedController stopped;
      record = run_episode(ep, resources, stopped);
    } else {
      record = run_episode(ep, resources, controller);
    }
    rows.push_back(record.metrics);
    if (hooks.on_episode) hooks.on_episode(record);
    result.records.push_back(std::move(record));
  }
  result.report = aggregate(rows);
  result.report.scene = config.scene;
  result.report.robot = config.robot;
  result.report.controller = std::string(to_string(config.controller));
  return result;
}

std::filesystem::path record_path(const std::filesystem::path& out_dir, std::int64_t episode_id) {
  char name[64];
  std::snprintf(name, sizeof name, "episode_%04lld.jsonl", static_cast<long long>(episode_id));
  return out_dir / "records" / name;
}

void write_report_files(const std::filesystem::path& out_dir, const TrialReport& report) {
  std::filesystem::create_directories(out_dir);
  for (const auto& [name, text] : {std::pair{"report.tsv", render_tsv(report)}, {"report.txt", render_table(report)}}) {
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw RuntimeError("cannot write " + (out_dir / name).string());
    out << text;
  }
}

void write_trial_outputs(const std::filesystem::path& out_dir, const TrialResult& result) {
  std::filesystem::create_directories(out_dir / "records");
  for (const auto& record : result.records) write_record(record_path(out_dir, record.config.episode_id), record);
  write_report_files(out_dir, result.report);
}

}  // namespace socnav
