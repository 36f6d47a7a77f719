#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "socnav/metrics.hpp"
#include "socnav/sensing.hpp"
#include "socnav/serialization.hpp"

namespace socnav {

struct Scene;
struct TrialReport;
struct WorldState;

enum class MessageType { hello, scene_info, episode_start, obs, cmd, episode_end, trial_end, error, ping, pong };

std::string_view to_string(MessageType type);
std::optional<MessageType> message_type_from_string(std::string_view s);

/// One protocol message. Serialized as a single JSON line with fields in
/// the order type, seq, payload.
struct Envelope {
  MessageType type = MessageType::ping;
  std::int64_t seq = 0;
  Json payload = Json::object();

  bool operator==(const Envelope&) const = default;
};

/// Decoding or session-level failure. `reason` is one of parse, schema,
/// seq, role, unexpected; `seq` is the offending message's seq when known.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string reason, std::optional<std::int64_t> seq, const std::string& what)
      : std::runtime_error(what), reason_(std::move(reason)), seq_(seq) {}
  const std::string& reason() const { return reason_; }
  std::optional<std::int64_t> seq() const { return seq_; }

 private:
  std::string reason_;
  std::optional<std::int64_t> seq_;
};

class EncodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON line plus trailing newline. Throws EncodeError on non-finite numbers
/// or a payload that does not match the type's schema.
std::string encode(const Envelope& env);

/// Parses and validates one line (trailing newline optional). Unknown
/// fields are ignored. Throws ProtocolError(parse|schema).
Envelope decode(std::string_view line);

/// Throws ProtocolError(schema) when the payload does not fit the type.
void validate_payload(MessageType type, const Json& payload);

/// Enforces seq = previous + 1 for one sender, starting at 1.
class SeqChecker {
 public:
  /// Throws ProtocolError(seq) on a gap and resynchronizes to the received seq.
  void check(const Envelope& env);
  /// Accepts `seq` as consumed, e.g. after a schema error.
  void skip(std::int64_t seq) { expected_ = seq + 1; }
  std::int64_t expected() const { return expected_; }

 private:
  std::int64_t expected_ = 1;
};

/// Stamps outgoing messages with consecutive seq numbers starting at 1.
class SeqCounter {
 public:
  Envelope make(MessageType type, Json payload) { return {type, next_++, std::move(payload)}; }

 private:
  std::int64_t next_ = 1;
};

enum class ClientRole { controller, teleop, spectator };
std::string_view to_string(ClientRole role);
std::optional<ClientRole> client_role_from_string(std::string_view s);

enum class SessionMode { lockstep, realtime };
std::string_view to_string(SessionMode mode);
std::optional<SessionMode> session_mode_from_string(std::string_view s);

// Payload builders.
Json hello_payload(ClientRole role);
Json scene_info_payload(const Scene& scene, int episodes, SessionMode mode);
Json episode_start_payload(std::int64_t episode_id, const Pose2D& start, const Pose2D& goal, const RobotSpec& robot,
                           double goal_tolerance, const std::string& config_hash);
/// Observation fields plus optional live extras for viewers.
Json obs_payload(const Observation& obs, const WorldState* world = nullptr);
Json cmd_payload(const Twist& cmd);
Json episode_end_payload(std::int64_t episode_id, const EpisodeMetrics& metrics);
Json trial_end_payload(const TrialReport& report);
Json error_payload(const std::string& reason, std::optional<std::int64_t> offending_seq, const std::string& message);

}  // namespace socnav
