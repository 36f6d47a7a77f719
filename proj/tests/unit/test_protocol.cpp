#include <doctest.h>

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "../golden_messages.hpp"
#include "socnav/protocol.hpp"

using namespace socnav;

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line + "\n");
  return lines;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProtocolError decode_error(std::string_view line) {
  try {
    decode(line);
  } catch (const ProtocolError& e) {
    return e;
  }
  FAIL("line decoded without error: " << line);
  return ProtocolError("", std::nullopt, "");
}

}  // namespace

TEST_SUITE("protocol") {
  TEST_CASE("golden lines for every message type") {
    const auto envs = test::golden_envelopes();
    const auto lines = read_lines(std::filesystem::path(SOCNAV_GOLDEN_DIR) / "messages.jsonl");
    REQUIRE(lines.size() == envs.size());
    std::set<MessageType> types;
    for (std::size_t i = 0; i < envs.size(); ++i) {
      CAPTURE(lines[i]);
      CHECK(encode(envs[i]) == lines[i]);
      CHECK(decode(lines[i]) == envs[i]);
      CHECK(encode(decode(lines[i])) == lines[i]);
      types.insert(envs[i].type);
    }
    CHECK(types.size() == 10);

    // The protocol document quotes the same lines.
    const std::string doc = read_file(std::filesystem::path(SOCNAV_GOLDEN_DIR) / ".." / ".." / "docs" / "PROTOCOL.md");
    for (const auto& line : lines) CHECK(doc.find(line.substr(0, line.size() - 1)) != std::string::npos);
  }

  TEST_CASE("ping encodes to the fixed line") {
    CHECK(encode({MessageType::ping, 1, Json::object()}) == "{\"type\":\"ping\",\"seq\":1,\"payload\":{}}\n");
  }

  TEST_CASE("doubles round-trip bit for bit") {
    std::mt19937_64 gen(2024);
    std::vector<double> values{0.1, -0.0, 0.0, std::numeric_limits<double>::denorm_min(),
                               -std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::min(),
                               std::numeric_limits<double>::max(), -std::numeric_limits<double>::max(),
                               std::nextafter(1.0, 2.0), 1e-310};
    while (values.size() < 10000) {
      const std::uint64_t bits = gen();
      // Every fourth draw forced into the subnormal range.
      const double d = std::bit_cast<double>(values.size() % 4 == 0 ? bits & 0x800FFFFFFFFFFFFFull : bits);
      if (std::isfinite(d)) values.push_back(d);
    }
    SeqCounter seq;
    for (std::size_t i = 0; i + 1 < values.size(); i += 2) {
      const Envelope env = seq.make(MessageType::cmd, cmd_payload({values[i], values[i + 1]}));
      const Envelope back = decode(encode(env));
      CHECK(std::bit_cast<std::uint64_t>(back.payload["v"].get<double>()) == std::bit_cast<std::uint64_t>(values[i]));
      CHECK(std::bit_cast<std::uint64_t>(back.payload["w"].get<double>()) ==
            std::bit_cast<std::uint64_t>(values[i + 1]));
    }
  }

  TEST_CASE("decode errors") {
    CHECK(decode_error("not json\n").reason() == "parse");
    const auto warp = decode_error(R"({"type":"warp","seq":2,"payload":{}})");
    CHECK(warp.reason() == "schema");
    CHECK(warp.seq() == 2);
    CHECK(decode_error(R"({"type":"cmd","seq":3,"payload":{"v":1}})").reason() == "schema");
    CHECK(decode_error(R"({"type":"cmd","seq":3,"payload":{"v":"fast","w":0}})").reason() == "schema");
    CHECK(decode_error(R"({"type":"cmd","payload":{"v":1,"w":0}})").reason() == "schema");
    CHECK(decode_error(R"({"type":"hello","seq":1,"payload":{"role":"pilot"}})").reason() == "schema");
    CHECK(decode_error(R"([1,2,3])").reason() == "schema");
    // Unknown fields are ignored.
    const Envelope e = decode(R"({"type":"cmd","seq":3,"extra":true,"payload":{"v":1,"w":0,"note":"x"}})");
    CHECK(e.type == MessageType::cmd);
    CHECK(e.payload["v"] == 1);
  }

  TEST_CASE("obs line populates an observation") {
    const auto envs = test::golden_envelopes();
    const auto lines = read_lines(std::filesystem::path(SOCNAV_GOLDEN_DIR) / "messages.jsonl");
    const Envelope env = decode(lines[3]);
    REQUIRE(env.type == MessageType::obs);
    const Observation obs = observation_from_json(env.payload);
    CHECK(obs.tick == 12);
    CHECK(obs.pose == Pose2D{1.25, 2.5, 0.125});
    CHECK(obs.twist == Twist{0.75, -0.25});
    CHECK(obs.goal == Pose2D{12.0, 8.5, 0.0});
    CHECK(obs.scan == std::vector<double>{30.0, 4.5, 2.75, 0.5});
    CHECK(obs.nearest_ped_distance == 1.5);
  }

  TEST_CASE("seq gaps are reported and resynchronized") {
    SeqChecker check;
    CHECK_NOTHROW(check.check({MessageType::ping, 1, Json::object()}));
    CHECK_NOTHROW(check.check({MessageType::ping, 2, Json::object()}));
    try {
      check.check({MessageType::ping, 5, Json::object()});
      FAIL("gap accepted");
    } catch (const ProtocolError& e) {
      CHECK(e.reason() == "seq");
      CHECK(e.seq() == 5);
    }
    CHECK_NOTHROW(check.check({MessageType::ping, 6, Json::object()}));
    CHECK_THROWS_AS(check.check({MessageType::ping, 6, Json::object()}), ProtocolError);
    check.skip(9);
    CHECK(check.expected() == 10);
  }

  TEST_CASE("non-finite numbers do not encode") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(encode({MessageType::cmd, 1, cmd_payload({nan, 0.0})}), EncodeError);
    CHECK_THROWS_AS(encode({MessageType::cmd, 1, cmd_payload({0.0, -inf})}), EncodeError);
    Observation obs;
    obs.scan = {1.0, inf};
    CHECK_THROWS_AS(encode({MessageType::obs, 1, obs_payload(obs)}), EncodeError);
    CHECK_THROWS_AS(encode({MessageType::cmd, 1, Json::object()}), EncodeError);
  }

  TEST_CASE("enum names") {
    for (auto r : {ClientRole::controller, ClientRole::teleop, ClientRole::spectator}) {
      CHECK(client_role_from_string(to_string(r)) == r);
    }
    CHECK(session_mode_from_string("realtime") == SessionMode::realtime);
    CHECK_FALSE(session_mode_from_string("turbo").has_value());
    CHECK_FALSE(message_type_from_string("warp").has_value());
  }
}
