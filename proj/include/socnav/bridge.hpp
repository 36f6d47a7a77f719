#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>

#include "socnav/protocol.hpp"
#include "socnav/trial.hpp"

namespace socnav {

inline constexpr std::uint16_t kDefaultPort = 7654;

struct ServeOptions {
  std::uint16_t port = kDefaultPort;  // 0 picks a free port
  SessionMode mode = SessionMode::lockstep;
  std::optional<std::filesystem::path> ui_dir;  // served under /ui
  const std::atomic<bool>* interrupt = nullptr;
  std::chrono::milliseconds tick_period{50};    // realtime cadence
};

/// Hosts one trial for one driving client (controller or teleop) plus any
/// number of spectators.
class BridgeServer {
 public:
  /// Binds the port immediately; throws PortInUse.
  BridgeServer(TrialConfig config, SceneResources& resources, ServeOptions options);
  ~BridgeServer();
  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  std::uint16_t port() const;

  /// Waits for a driving client, runs the trial and sends trial_end. A
  /// driver that disconnects aborts the current and remaining episodes.
  TrialResult run(const TrialHooks& hooks = {});

  struct State;

 private:
  std::unique_ptr<State> state_;
};

}  // namespace socnav
