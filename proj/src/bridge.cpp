#include "socnav/bridge.hpp"

#include <algorithm>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

#include "socnav/transport.hpp"
#include "socnav/world.hpp"

namespace socnav {

namespace {

using namespace std::chrono_literals;

struct Client {
  std::unique_ptr<Connection> conn;
  std::mutex send_mutex;
  SeqCounter out;
  std::optional<ClientRole> role;

  bool send(MessageType type, Json payload) {
    std::lock_guard lock(send_mutex);
    return conn->write_line(encode(out.make(type, std::move(payload))));
  }
};

}  // namespace

struct BridgeServer::State {
  TrialConfig config;
  SceneResources& resources;
  ServeOptions options;
  Listener listener;

  std::mutex mutex;
  std::condition_variable cv;
  std::shared_ptr<Client> driver;
  bool driver_gone = false;
  std::vector<std::shared_ptr<Client>> spectators;
  std::vector<std::shared_ptr<Client>> clients;
  bool awaiting_cmd = false;
  std::optional<Twist> pending_cmd;
  std::shared_ptr<CommandCell> teleop_cell = std::make_shared<CommandCell>();

  std::atomic<bool> stopping{false};
  std::thread acceptor;
  std::mutex threads_mutex;
  std::vector<std::thread> readers;

  State(TrialConfig c, SceneResources& r, ServeOptions o)
      : config(std::move(c)), resources(r), options(std::move(o)), listener(options.port) {}

  bool interrupted() const { return options.interrupt != nullptr && options.interrupt->load(); }

  void broadcast(MessageType type, const Json& payload) {
    std::shared_ptr<Client> d;
    std::vector<std::shared_ptr<Client>> watchers;
    {
      std::lock_guard lock(mutex);
      if (!driver_gone) d = driver;
      watchers = spectators;
    }
    if (d && !d->send(type, payload)) mark_driver_gone();
    for (const auto& c : watchers) c->send(type, payload);
  }

  void mark_driver_gone() {
    std::lock_guard lock(mutex);
    driver_gone = true;
    cv.notify_all();
  }

  void accept_loop() {
    while (!stopping) {
      const int fd = listener.accept(100ms);
      if (fd < 0) continue;
      std::lock_guard lock(threads_mutex);
      readers.emplace_back([this, fd] { serve_client(fd); });
    }
  }

  void serve_client(int fd) {
    auto conn = open_server_connection(fd, options.ui_dir);
    if (!conn) return;
    auto client = std::make_shared<Client>();
    client->conn = std::move(conn);
    {
      std::lock_guard lock(mutex);
      clients.push_back(client);
    }
    SeqChecker seq;
    while (!stopping) {
      const ReadResult r = client->conn->read_line(200ms);
      if (r.status == ReadStatus::timeout) continue;
      if (r.status == ReadStatus::closed) break;
      Envelope env;
      try {
        env = decode(r.line);
        seq.check(env);
      } catch (const ProtocolError& e) {
        if (e.reason() == "schema" && e.seq()) seq.skip(*e.seq());
        client->send(MessageType::error, error_payload(e.reason(), e.seq(), e.what()));
        continue;
      }
      if (!handle(*client, client, env)) break;
    }
    {
      std::lock_guard lock(mutex);
      std::erase(spectators, client);
      if (driver == client) driver_gone = true;
      cv.notify_all();
    }
    client->conn->close();
  }

  /// Returns false when the connection should be dropped.
  bool handle(Client& c, const std::shared_ptr<Client>& self, const Envelope& env) {
    switch (env.type) {
      case MessageType::hello: {
        if (c.role) {
          c.send(MessageType::error, error_payload("unexpected", env.seq, "hello already received"));
          return true;
        }
        const ClientRole role = *client_role_from_string(env.payload.at("role").get<std::string>());
        if (role != ClientRole::spectator) {
          std::lock_guard lock(mutex);
          if (driver) {
            c.send(MessageType::error,
                   error_payload("role", env.seq, "a controlling client is already connected"));
            return false;
          }
        }
        c.role = role;
        c.send(MessageType::scene_info, scene_info_payload(resources.scene(), config.episodes, options.mode));
        std::lock_guard lock(mutex);
        if (role == ClientRole::spectator) {
          spectators.push_back(self);
        } else {
          driver = self;
          cv.notify_all();
        }
        return true;
      }
      case MessageType::cmd: {
        const Twist cmd = twist_from_json(env.payload);
        std::unique_lock lock(mutex);
        if (driver.get() != &c) {
          lock.unlock();
          c.send(MessageType::error, error_payload("role", env.seq, "only the controlling client may send cmd"));
          return true;
        }
        if (options.mode == SessionMode::realtime) {
          lock.unlock();
          teleop_cell->put(cmd);
          return true;
        }
        if (!awaiting_cmd || pending_cmd) {
          lock.unlock();
          c.send(MessageType::error, error_payload("unexpected", env.seq, "no observation is awaiting a command"));
          return true;
        }
        pending_cmd = cmd;
        cv.notify_all();
        return true;
      }
      case MessageType::ping:
        c.send(MessageType::pong, Json::object());
        return true;
      case MessageType::pong:
        return true;
      default:
        c.send(MessageType::error, error_payload("unexpected", env.seq,
                                                 std::string(to_string(env.type)) + " is not accepted from clients"));
        return true;
    }
  }

  void shutdown() {
    stopping = true;
    if (acceptor.joinable()) acceptor.join();
    {
      std::lock_guard lock(mutex);
      for (const auto& c : clients) c->conn->close();
    }
    std::vector<std::thread> threads;
    {
      std::lock_guard lock(threads_mutex);
      threads.swap(readers);
    }
    for (auto& t : threads) t.join();
  }
};

namespace {

/// Controller backed by the session's driving client.
class RemoteController final : public Controller {
 public:
  explicit RemoteController(BridgeServer::State& s) : s_(s), teleop_(s.teleop_cell) {}

  void begin_episode(const EpisodeStart& start) override {
    check_alive();
    world_.reset();
    next_tick_ = std::chrono::steady_clock::now();
    teleop_.begin_episode(start);
    s_.broadcast(MessageType::episode_start,
                 episode_start_payload(start.episode_id, start.start, start.goal, start.robot, start.goal_tolerance,
                                       start.config_hash));
    check_alive();
  }

  void observe_world(const WorldState& world) override { world_ = world; }

  ControllerDecision decide(const Observation& obs) override {
    check_alive();
    const Json payload = obs_payload(obs, world_ ? &*world_ : nullptr);
    if (s_.options.mode == SessionMode::realtime) {
      s_.broadcast(MessageType::obs, payload);
      next_tick_ += s_.options.tick_period;
      const auto now = std::chrono::steady_clock::now();
      if (next_tick_ < now) next_tick_ = now;
      std::this_thread::sleep_until(next_tick_);
      check_alive();
      return teleop_.decide(obs);
    }
    {
      std::lock_guard lock(s_.mutex);
      s_.awaiting_cmd = true;
      s_.pending_cmd.reset();
    }
    s_.broadcast(MessageType::obs, payload);
    std::unique_lock lock(s_.mutex);
    while (!s_.pending_cmd && !s_.driver_gone && !s_.interrupted()) s_.cv.wait_for(lock, 50ms);
    s_.awaiting_cmd = false;
    if (s_.pending_cmd) {
      const Twist cmd = *s_.pending_cmd;
      s_.pending_cmd.reset();
      return {cmd, false};
    }
    lock.unlock();
    check_alive();
    throw ControllerAborted("interrupt", "interrupted");
  }

  void end_episode(std::int64_t episode_id, const EpisodeMetrics& metrics) override {
    s_.broadcast(MessageType::episode_end, episode_end_payload(episode_id, metrics));
  }

 private:
  void check_alive() const {
    if (s_.interrupted()) throw ControllerAborted("interrupt", "interrupted");
    std::lock_guard lock(s_.mutex);
    if (s_.driver_gone) throw ControllerAborted("disconnect", "controlling client disconnected");
  }

  BridgeServer::State& s_;
  TeleopController teleop_;
  std::optional<WorldState> world_;
  std::chrono::steady_clock::time_point next_tick_;
};

}  // namespace

BridgeServer::BridgeServer(TrialConfig config, SceneResources& resources, ServeOptions options)
    : state_(std::make_unique<State>(std::move(config), resources, std::move(options))) {
  validate_trial_config(state_->config);
}

BridgeServer::~BridgeServer() { state_->shutdown(); }

std::uint16_t BridgeServer::port() const { return state_->listener.port(); }

TrialResult BridgeServer::run(const TrialHooks& hooks) {
  State& s = *state_;
  s.acceptor = std::thread([&s] { s.accept_loop(); });
  {
    std::unique_lock lock(s.mutex);
    while (!s.driver && !s.interrupted()) s.cv.wait_for(lock, 50ms);
  }
  RemoteController remote(s);
  TrialHooks combined = hooks;
  combined.stop_requested = [&s, &hooks] { return s.interrupted() || (hooks.stop_requested && hooks.stop_requested()); };
  TrialResult result = run_trial(s.config, remote, s.resources, combined);
  s.broadcast(MessageType::trial_end, trial_end_payload(result.report));
  s.shutdown();
  return result;
}

}  // namespace socnav
