#include <doctest.h>

#include <fstream>
#include <future>
#include <thread>

#include "../support.hpp"
#include "socnav/bridge.hpp"
#include "socnav/transport.hpp"

using namespace socnav;
using namespace socnav::test;
using namespace std::chrono_literals;

namespace {

TrialConfig short_trial(int episodes, int peds = 3, double timeout = 2.0) {
  TrialConfig c;
  c.scene = "lab";
  c.robot = "jackal";
  c.controller = ControllerKind::external;
  c.episodes = episodes;
  c.master_seed = 11;
  c.crowd.count = peds;
  c.timeout = timeout;
  return c;
}

ServeOptions any_port(SessionMode mode = SessionMode::lockstep) {
  ServeOptions o;
  o.port = 0;
  o.mode = mode;
  return o;
}

/// Scripted client: stamps its own seq numbers and decodes every reply.
class Client {
 public:
  explicit Client(std::unique_ptr<Connection> conn) : conn_(std::move(conn)) {}

  static Client tcp(std::uint16_t port) { return Client(connect_tcp("127.0.0.1", port)); }

  void send(MessageType type, Json payload) { REQUIRE(conn_->write_line(encode(seq_.make(type, std::move(payload))))); }
  void send_raw(const std::string& line) { conn_->write_line(line); }

  std::optional<Envelope> recv(std::chrono::milliseconds timeout = 10s) {
    const ReadResult r = conn_->read_line(timeout);
    if (r.status != ReadStatus::line) return std::nullopt;
    return decode(r.line);
  }

  Envelope expect(MessageType type) {
    auto env = recv();
    REQUIRE(env.has_value());
    REQUIRE(to_string(env->type) == to_string(type));
    return *env;
  }

  ReadStatus status_within(std::chrono::milliseconds timeout) { return conn_->read_line(timeout).status; }
  void close() { conn_->close(); }

 private:
  std::unique_ptr<Connection> conn_;
  SeqCounter seq_;
};

/// Drives a lockstep session; `decide` maps (episode index, obs) to a cmd.
template <class Decide>
std::vector<Envelope> drive(Client& c, Decide decide) {
  std::vector<Envelope> seen;
  c.send(MessageType::hello, hello_payload(ClientRole::controller));
  int episode = -1;
  for (;;) {
    auto env = c.recv();
    REQUIRE(env.has_value());
    seen.push_back(*env);
    if (env->type == MessageType::episode_start) ++episode;
    if (env->type == MessageType::obs) c.send(MessageType::cmd, cmd_payload(decide(episode, *env)));
    if (env->type == MessageType::trial_end) return seen;
  }
}

std::vector<MessageType> types_of(const std::vector<Envelope>& envs) {
  std::vector<MessageType> t;
  for (const auto& e : envs) t.push_back(e.type);
  return t;
}

}  // namespace

TEST_SUITE("bridge") {
  TEST_CASE("zero episodes: hello, scene_info, trial_end") {
    SceneResources res(load_scene("lab"));
    BridgeServer server(short_trial(0), res, any_port());
    auto done = std::async(std::launch::async, [&] { return server.run(); });
    Client c = Client::tcp(server.port());
    const auto seen = drive(c, [](int, const Envelope&) { return Twist{}; });
    CHECK(types_of(seen) == std::vector<MessageType>{MessageType::scene_info, MessageType::trial_end});
    CHECK(seen[0].seq == 1);
    CHECK(seen[0].payload["episodes"] == 0);
    CHECK(seen[1].seq == 2);
    CHECK(done.get().records.empty());
  }

  TEST_CASE("idle client times out every episode") {
    SceneResources res(load_scene("lab"));
    BridgeServer server(short_trial(2, 2, 1.0), res, any_port());
    auto done = std::async(std::launch::async, [&] { return server.run(); });
    Client c = Client::tcp(server.port());
    const auto seen = drive(c, [](int, const Envelope&) { return Twist{}; });
    int obs = 0, ends = 0;
    std::int64_t last_seq = 0;
    for (const auto& e : seen) {
      CHECK(e.seq == last_seq + 1);
      last_seq = e.seq;
      if (e.type == MessageType::obs) ++obs;
      if (e.type == MessageType::episode_end) {
        ++ends;
        CHECK(e.payload["metrics"]["completed"] == false);
        CHECK(e.payload["metrics"]["elapsed"] == 1.0);
      }
    }
    CHECK(obs == 2 * 20);
    CHECK(ends == 2);
    const TrialResult result = done.get();
    CHECK(result.report.completion_rate == 0);
    CHECK(result.report.controller == "external");
  }

  TEST_CASE("lockstep server waits for the command") {
    SceneResources res(load_scene("lab"));
    BridgeServer server(short_trial(1), res, any_port());
    auto done = std::async(std::launch::async, [&] { return server.run(); });
    Client c = Client::tcp(server.port());
    c.send(MessageType::hello, hello_payload(ClientRole::controller));
    c.expect(MessageType::scene_info);
    c.expect(MessageType::episode_start);
    const Envelope first = c.expect(MessageType::obs);
    CHECK(first.payload["tick"] == 0);
    CHECK(c.status_within(400ms) == ReadStatus::timeout);
    c.send(MessageType::cmd, cmd_payload({0.0, 0.0}));
    const Envelope second = c.expect(MessageType::obs);
    CHECK(second.payload["tick"] == 1);
    c.close();
    done.get();
  }

  TEST_CASE("scripted client replaying the builtin commands reproduces its report") {
    TrialConfig cfg = short_trial(3, 5, 12.0);
    SceneResources res(load_scene("lab"));
    BaselineController builtin;
    TrialConfig local = cfg;
    local.controller = ControllerKind::builtin;
    const TrialResult reference = run_trial(local, builtin, res);

    BridgeServer server(cfg, res, any_port());
    auto done = std::async(std::launch::async, [&] { return server.run(); });
    Client c = Client::tcp(server.port());
    const auto seen = drive(c, [&](int episode, const Envelope& obs) {
      const auto tick = obs.payload["tick"].get<std::size_t>();
      return *reference.records[episode].ticks[tick + 1].cmd;
    });
    TrialResult remote = done.get();
    remote.report.controller = reference.report.controller;
    CHECK(remote.report == reference.report);
    CHECK(render_tsv(remote.report) == render_tsv(reference.report));
    for (std::size_t i = 0; i < reference.records.size(); ++i) {
      CHECK(record_to_string(remote.records[i]) == record_to_string(reference.records[i]));
    }
    const Json& report = seen.back().payload["report"];
    CHECK(report["completion_rate"] == reference.report.completion_rate);
  }

  TEST_CASE("role and sequencing errors") {
    SceneResources res(load_scene("lab"));
    BridgeServer server(short_trial(1), res, any_port());
    auto done = std::async(std::launch::async, [&] { return server.run(); });

    Client spectator = Client::tcp(server.port());
    spectator.send(MessageType::hello, hello_payload(ClientRole::spectator));
    spectator.expect(MessageType::scene_info);
    spectator.send(MessageType::cmd, cmd_payload({1.0, 0.0}));
    Envelope err = spectator.expect(MessageType::error);
    CHECK(err.payload["reason"] == "role");
    CHECK(err.payload["offending_seq"] == 2);
    spectator.send(MessageType::ping, Json::object());
    spectator.expect(MessageType::pong);
    spectator.send(MessageType::hello, hello_payload(ClientRole::spectator));
    CHECK(spectator.expect(MessageType::error).payload["reason"] == "unexpected");
    spectator.send_raw("not json\n");
    err = spectator.expect(MessageType::error);
    CHECK(err.payload["reason"] == "parse");
    CHECK(err.payload["offending_seq"].is_null());
    spectator.send_raw(R"({"type":"ping","seq":9,"payload":{}})");
    err = spectator.expect(MessageType::error);
    CHECK(err.payload["reason"] == "seq");
    CHECK(err.payload["offending_seq"] == 9);

    Client driver = Client::tcp(server.port());
    driver.send(MessageType::hello, hello_payload(ClientRole::controller));
    driver.expect(MessageType::scene_info);

    Client second = Client::tcp(server.port());
    second.send(MessageType::hello, hello_payload(ClientRole::teleop));
    CHECK(second.expect(MessageType::error).payload["reason"] == "role");
    CHECK(second.status_within(5s) == ReadStatus::closed);

    // The spectator sees the same episode traffic as the driver.
    driver.expect(MessageType::episode_start);
    driver.expect(MessageType::obs);
    spectator.expect(MessageType::episode_start);
    spectator.expect(MessageType::obs);
    driver.close();
    done.get();
  }

  TEST_CASE("driver disconnect aborts the current and remaining episodes") {
    SceneResources res(load_scene("lab"));
    BridgeServer server(short_trial(3), res, any_port());
    auto done = std::async(std::launch::async, [&] { return server.run(); });
    Client c = Client::tcp(server.port());
    c.send(MessageType::hello, hello_payload(ClientRole::controller));
    c.expect(MessageType::scene_info);
    c.expect(MessageType::episode_start);
    c.expect(MessageType::obs);
    c.send(MessageType::cmd, cmd_payload({0.5, 0.0}));
    c.expect(MessageType::obs);
    c.close();
    const TrialResult result = done.get();
    REQUIRE(result.records.size() == 3);
    for (const auto& r : result.records) {
      CHECK(r.metrics.aborted);
      CHECK(r.metrics.abort_reason == "disconnect");
      CHECK_FALSE(r.metrics.completed);
    }
    CHECK(result.records[0].ticks.size() == 2);
    CHECK(result.report.aborted == 3);
    CHECK(result.report.n == 0);
  }

  TEST_CASE("interrupt aborts remaining episodes") {
    SceneResources res(load_scene("lab"));
    std::atomic<bool> stop{false};
    ServeOptions o = any_port();
    o.interrupt = &stop;
    BridgeServer server(short_trial(2), res, o);
    auto done = std::async(std::launch::async, [&] { return server.run(); });
    Client c = Client::tcp(server.port());
    c.send(MessageType::hello, hello_payload(ClientRole::controller));
    c.expect(MessageType::scene_info);
    c.expect(MessageType::episode_start);
    c.expect(MessageType::obs);
    stop = true;
    const TrialResult result = done.get();
    REQUIRE(result.records.size() == 2);
    CHECK(result.records[0].metrics.abort_reason == "interrupt");
    CHECK(result.records[1].metrics.abort_reason == "interrupt");
  }

  TEST_CASE("websocket clients speak the same protocol") {
    CHECK(websocket_accept_key("dGhlIHNhbXBsZSBub25jZQ==") == "s3pPLMBiTxaQ9kYGzzhZRbK+xOo=");
    SceneResources res(load_scene("lab"));
    BridgeServer server(short_trial(1, 2, 0.5), res, any_port());
    auto done = std::async(std::launch::async, [&] { return server.run(); });
    Client c(connect_websocket("127.0.0.1", server.port(), "/ws"));
    const auto seen = drive(c, [](int, const Envelope&) { return Twist{0.2, 0.0}; });
    CHECK(seen.front().type == MessageType::scene_info);
    CHECK(seen.back().type == MessageType::trial_end);
    CHECK(done.get().records.size() == 1);
  }

  TEST_CASE("static ui files") {
    const auto dir = temp_dir("ui");
    std::ofstream(dir / "index.html") << "<html>hi</html>";
    std::filesystem::create_directories(dir / "assets");
    std::ofstream(dir / "assets" / "app.js") << "console.log(1)";
    std::ofstream(dir.parent_path() / "secret.txt") << "no";
    SceneResources res(load_scene("lab"));
    ServeOptions o = any_port();
    o.ui_dir = dir;
    BridgeServer server(short_trial(0), res, o);
    auto done = std::async(std::launch::async, [&] { return server.run(); });

    const auto index = http_get("127.0.0.1", server.port(), "/ui");
    CHECK(index.status == 200);
    CHECK(index.body == "<html>hi</html>");
    CHECK(index.content_type.find("text/html") == 0);
    CHECK(http_get("127.0.0.1", server.port(), "/ui/").body == "<html>hi</html>");
    const auto js = http_get("127.0.0.1", server.port(), "/ui/assets/app.js");
    CHECK(js.status == 200);
    CHECK(js.body == "console.log(1)");
    CHECK(http_get("127.0.0.1", server.port(), "/ui/missing.css").status == 404);
    CHECK(http_get("127.0.0.1", server.port(), "/ui/../secret.txt").status == 404);
    CHECK(http_get("127.0.0.1", server.port(), "/ui/%2e%2e/secret.txt").status == 404);
    CHECK(http_get("127.0.0.1", server.port(), "/elsewhere").status == 404);

    Client c = Client::tcp(server.port());
    drive(c, [](int, const Envelope&) { return Twist{}; });
    done.get();
    std::filesystem::remove(dir.parent_path() / "secret.txt");
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("occupied port is reported") {
    Listener taken(0);
    SceneResources res(load_scene("lab"));
    ServeOptions o;
    o.port = taken.port();
    CHECK_THROWS_AS(BridgeServer(short_trial(1), res, o), PortInUse);
  }

  TEST_CASE("realtime teleop stops when commands go stale") {
    SceneResources res(load_scene("lab"));
    ServeOptions o = any_port(SessionMode::realtime);
    o.tick_period = 10ms;
    TrialConfig cfg = short_trial(1, 0, 2.0);
    cfg.controller = ControllerKind::teleop;
    BridgeServer server(cfg, res, o);
    auto done = std::async(std::launch::async, [&] { return server.run(); });
    Client c = Client::tcp(server.port());
    c.send(MessageType::hello, hello_payload(ClientRole::teleop));
    CHECK(c.expect(MessageType::scene_info).payload["mode"] == "realtime");
    c.expect(MessageType::episode_start);
    c.expect(MessageType::obs);
    c.send(MessageType::cmd, cmd_payload({0.5, 0.0}));
    double peak = 0.0;
    double last = -1.0;
    for (;;) {
      const auto env = c.recv();
      REQUIRE(env.has_value());
      if (env->type == MessageType::obs) {
        last = env->payload["twist"]["v"].get<double>();
        peak = std::max(peak, last);
      }
      if (env->type == MessageType::trial_end) break;
    }
    CHECK(peak == doctest::Approx(0.5));
    CHECK(last == 0.0);
    done.get();
  }
}
