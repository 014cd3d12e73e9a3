#include "ksf/session.hpp"

#include <cstdio>
#include <cstring>

#include <json.hpp>

#include "ksf/error.hpp"
#include "ksf/presets.hpp"

namespace ksf {

using nlohmann::json;

namespace {

std::string content_id(const SignalBuffer& buffer) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(buffer.samples().data());
  for (std::size_t i = 0; i < buffer.size() * sizeof(float); ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "sig-%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

json parse_object(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::protocol_error, "message is not a JSON object");
  }
  return j;
}

template <typename T>
T field(const json& j, const char* name, T fallback) {
  const auto it = j.find(name);
  if (it == j.end()) return fallback;
  try {
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_integer()) throw std::invalid_argument("type");
    }
    return it->get<T>();
  } catch (const std::exception&) {
    throw Error(ErrorCode::protocol_error, std::string("field '") + name + "' has wrong type");
  }
}

}  // namespace

SignalRegistry::SignalRegistry() {
  signals_.emplace("pilot", std::make_shared<const SignalBuffer>(pilot_fragment()));
}

std::string SignalRegistry::add(SignalBuffer buffer) {
  std::string id = content_id(buffer);
  std::lock_guard lock(mutex_);
  signals_.try_emplace(id, std::make_shared<const SignalBuffer>(std::move(buffer)));
  return id;
}

std::shared_ptr<const SignalBuffer> SignalRegistry::find(std::string_view id) const {
  std::lock_guard lock(mutex_);
  const auto it = signals_.find(id);
  return it == signals_.end() ? nullptr : it->second;
}

SessionConfig parse_session_config(std::string_view json_text) {
  const json j = parse_object(json_text);
  SessionConfig c;
  if (j.contains("samples_per_mm")) {
    c.samples_per_mm = field<double>(j, "samples_per_mm", 0.0);
    c.preset_id = std::nullopt;
  }
  if (j.contains("preset")) c.preset_id = field<int>(j, "preset", 0);
  c.origin_mm = field<double>(j, "origin_mm", c.origin_mm);
  c.friction_enabled = field<bool>(j, "friction_enabled", c.friction_enabled);
  c.engine_rate = field<int>(j, "engine_rate", c.engine_rate);
  c.signal_id = field<std::string>(j, "signal", c.signal_id);
  return c;
}

std::string encode_frame_json(const FrameMsg& f) {
  json j = {{"type", "frame"},         {"seq", f.seq},
            {"t_s", f.t_s},            {"position_mm", f.position_mm},
            {"speed_mm_s", f.speed_mm_s}, {"friction_N", f.friction_N}};
  return j.dump();
}

std::string encode_audio_frame(std::span<const double> audio) {
  const auto count = static_cast<std::uint32_t>(audio.size());
  std::string out(5 + 4 * audio.size(), '\0');
  out[0] = static_cast<char>(kAudioFrameTag);
  for (int i = 0; i < 4; ++i) out[1 + i] = static_cast<char>((count >> (8 * i)) & 0xFF);
  for (std::size_t k = 0; k < audio.size(); ++k) {
    const float s = static_cast<float>(audio[k]);
    std::memcpy(out.data() + 5 + 4 * k, &s, 4);
  }
  return out;
}

std::vector<float> decode_audio_frame(std::string_view bytes) {
  if (bytes.size() < 5 || static_cast<std::uint8_t>(bytes[0]) != kAudioFrameTag) {
    throw Error(ErrorCode::protocol_error, "not an audio frame");
  }
  std::uint32_t count = 0;
  for (int i = 0; i < 4; ++i) {
    count |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[1 + i])) << (8 * i);
  }
  if (bytes.size() != 5 + 4 * static_cast<std::size_t>(count)) {
    throw Error(ErrorCode::protocol_error, "audio frame length mismatch");
  }
  std::vector<float> out(count);
  std::memcpy(out.data(), bytes.data() + 5, 4 * static_cast<std::size_t>(count));
  return out;
}

Session::Session(SessionConfig config, std::unique_ptr<RenderPipeline> pipeline)
    : config_(std::move(config)), pipeline_(std::move(pipeline)) {}

Session Session::open(const SessionConfig& config, const SignalRegistry& registry) {
  PipelineConfig pc;
  pc.rate = EngineRate(config.engine_rate);
  if (config.samples_per_mm) {
    pc.mapping = SpatialMapping::make(*config.samples_per_mm, config.origin_mm);
  } else if (config.preset_id) {
    pc.mapping = mapping_preset(*config.preset_id).mapping(config.origin_mm);
  } else {
    throw Error(ErrorCode::invalid_argument, "config needs a preset or samples_per_mm");
  }
  pc.friction_enabled = config.friction_enabled;
  auto signal = registry.find(config.signal_id);
  if (!signal) {
    throw Error(ErrorCode::invalid_argument, "unknown signal '" + config.signal_id + "'");
  }
  return Session(config, std::make_unique<RenderPipeline>(std::move(signal), pc));
}

double Session::fragment_width_mm() const noexcept {
  return pipeline_->config().mapping.fragment_width_mm(pipeline_->signal());
}

Session::Output Session::handle_move(const MoveMsg& msg) {
  if (last_seq_ && msg.seq != *last_seq_ + 1) {
    throw Error(ErrorCode::session_fault,
                "out-of-order seq " + std::to_string(msg.seq) + " after " +
                    std::to_string(*last_seq_));
  }
  last_seq_ = msg.seq;
  const StepResult& step = pipeline_->step(msg.update);
  Output out;
  out.frame.seq = msg.seq;
  out.frame.t_s = static_cast<double>(step.motion.update_index + 1) * kUpdateIntervalS;
  out.frame.position_mm = step.motion.position_mm;
  out.frame.speed_mm_s = step.motion.speed_mm_s;
  out.frame.friction_N = step.final_friction_N;
  out.audio_binary = encode_audio_frame(step.audio);
  return out;
}

std::string encode_error_json(std::string_view code, std::string_view message) {
  return json{{"type", "error"}, {"code", code}, {"message", message}}.dump();
}

ProtocolSession::ProtocolSession(std::shared_ptr<const SignalRegistry> registry)
    : registry_(std::move(registry)) {}

std::vector<OutMessage> ProtocolSession::configure(std::string_view text) {
  const SessionConfig config = parse_session_config(text);
  session_.reset();
  session_.emplace(Session::open(config, *registry_));
  const auto& pc = session_->pipeline().config();
  json ready = {{"type", "ready"},
                {"engine_rate", pc.rate.hz()},
                {"samples_per_update", pc.rate.samples_per_update()},
                {"samples_per_mm", pc.mapping.samples_per_mm},
                {"origin_mm", pc.mapping.origin_mm},
                {"fragment_width_mm", session_->fragment_width_mm()},
                {"friction_enabled", pc.friction_enabled},
                {"friction_N", session_->pipeline().last_friction_N()},
                {"signal", config.signal_id}};
  ready["preset"] = config.preset_id ? json(*config.preset_id) : json(nullptr);
  return {{false, ready.dump()}};
}

std::vector<OutMessage> ProtocolSession::on_text(std::string_view text) {
  if (closed_) return {};
  try {
    const json j = parse_object(text);
    const std::string type = field<std::string>(j, "type", "");
    if (type == "config") return configure(text);
    if (type == "move") {
      if (!session_) throw Error(ErrorCode::protocol_error, "move before config");
      if (!j.contains("seq") || !j.contains("dx_counts")) {
        throw Error(ErrorCode::protocol_error, "move needs seq and dx_counts");
      }
      MoveMsg move;
      const auto seq = field<std::int64_t>(j, "seq", 0);
      if (seq < 0) throw Error(ErrorCode::protocol_error, "seq must be >= 0");
      move.seq = static_cast<std::uint64_t>(seq);
      move.update.dx_counts = field<std::int64_t>(j, "dx_counts", 0);
      move.update.dy_counts = field<std::int64_t>(j, "dy_counts", 0);
      auto out = session_->handle_move(move);
      return {{false, encode_frame_json(out.frame)}, {true, std::move(out.audio_binary)}};
    }
    throw Error(ErrorCode::protocol_error, "unknown message type '" + type + "'");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::session_fault) closed_ = true;
    return {{false, encode_error_json(to_string(e.code()), e.what())}};
  }
}

std::vector<OutMessage> ProtocolSession::on_binary(std::string_view) {
  if (closed_) return {};
  return {{false, encode_error_json(to_string(ErrorCode::protocol_error),
                                    "clients send text messages only")}};
}

}  // namespace ksf
