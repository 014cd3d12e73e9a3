#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ksf/pipeline.hpp"

namespace ksf {

inline constexpr int kDefaultLiveRateHz = 48000;
inline constexpr std::uint8_t kAudioFrameTag = 0x01;
inline constexpr std::size_t kMaxQueuedFrames = 16;

/// Immutable signal store shared by all sessions. "pilot" is always present;
/// uploads get a content-derived id.
class SignalRegistry {
 public:
  SignalRegistry();

  std::string add(SignalBuffer buffer);
  std::shared_ptr<const SignalBuffer> find(std::string_view id) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const SignalBuffer>, std::less<>> signals_;
};

struct SessionConfig {
  std::optional<int> preset_id = 2;
  std::optional<double> samples_per_mm;  // overrides the preset when set
  double origin_mm = 0.0;
  bool friction_enabled = true;
  int engine_rate = kDefaultLiveRateHz;
  std::string signal_id = "pilot";
};

/// Parses the body of a {"type":"config", ...} message.
SessionConfig parse_session_config(std::string_view json_text);

struct MoveMsg {
  std::uint64_t seq = 0;
  DisplacementUpdate update;
};

struct FrameMsg {
  std::uint64_t seq = 0;
  double t_s = 0.0;
  double position_mm = 0.0;
  double speed_mm_s = 0.0;
  double friction_N = kDeviceMinForceN;
};

std::string encode_frame_json(const FrameMsg& frame);
/// Tag byte 0x01, u32 LE sample count, float32 LE samples.
std::string encode_audio_frame(std::span<const double> audio);
std::vector<float> decode_audio_frame(std::string_view bytes);

/// One live session: a RenderPipeline plus sequence bookkeeping.
class Session {
 public:
  /// Throws invalid_argument on an unsupported rate, unknown preset or
  /// unknown signal id.
  static Session open(const SessionConfig& config, const SignalRegistry& registry);

  struct Output {
    FrameMsg frame;
    std::string audio_binary;
  };

  /// Throws session_fault unless seq follows the previous one.
  Output handle_move(const MoveMsg& msg);

  const SessionConfig& config() const noexcept { return config_; }
  const RenderPipeline& pipeline() const noexcept { return *pipeline_; }
  double fragment_width_mm() const noexcept;

 private:
  Session(SessionConfig config, std::unique_ptr<RenderPipeline> pipeline);

  SessionConfig config_;
  std::unique_ptr<RenderPipeline> pipeline_;
  std::optional<std::uint64_t> last_seq_;
};

struct OutMessage {
  bool binary = false;
  std::string payload;
};

/// Transport-independent protocol state machine. Feed it each incoming text
/// message; it returns the replies to send in order. A session fault sets
/// closed() and the caller should close the connection after flushing.
class ProtocolSession {
 public:
  explicit ProtocolSession(std::shared_ptr<const SignalRegistry> registry);

  std::vector<OutMessage> on_text(std::string_view text);
  std::vector<OutMessage> on_binary(std::string_view bytes);

  bool closed() const noexcept { return closed_; }
  bool configured() const noexcept { return session_.has_value(); }

 private:
  std::vector<OutMessage> configure(std::string_view text);

  std::shared_ptr<const SignalRegistry> registry_;
  std::optional<Session> session_;
  bool closed_ = false;
};

std::string encode_error_json(std::string_view code, std::string_view message);

/// Outgoing-frame accounting for one connection. Reading from the client
/// stops while `kMaxQueuedFrames` frames are unsent and resumes once the
/// queue drains; nothing is synthesized for the paused period.
class FlowGate {
 public:
  explicit FlowGate(std::size_t depth = kMaxQueuedFrames) : depth_(depth) {}

  void frame_queued() noexcept { ++queued_; if (queued_ >= depth_) paused_ = true; }
  void frame_sent() noexcept {
    if (queued_ > 0) --queued_;
    if (queued_ < depth_) paused_ = false;
  }
  bool paused() const noexcept { return paused_; }
  std::size_t queued() const noexcept { return queued_; }
  std::size_t depth() const noexcept { return depth_; }

 private:
  std::size_t depth_;
  std::size_t queued_ = 0;
  bool paused_ = false;
};

}  // namespace ksf
