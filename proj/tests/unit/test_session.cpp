#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include "ksf/error.hpp"
#include "ksf/session.hpp"
#include "support/oracles.hpp"

using namespace ksf;
using nlohmann::json;

namespace {

std::shared_ptr<SignalRegistry> registry() { return std::make_shared<SignalRegistry>(); }

json text_of(const OutMessage& m) {
  REQUIRE_FALSE(m.binary);
  return json::parse(m.payload);
}

std::string move(std::uint64_t seq, std::int64_t dx) {
  return json{{"type", "move"}, {"seq", seq}, {"dx_counts", dx}, {"dy_counts", 0}}.dump();
}

}  // namespace

TEST_CASE("config handshake", "[session]") {
  ProtocolSession p(registry());
  auto out = p.on_text(R"({"type":"config","preset":2})");
  REQUIRE(out.size() == 1);
  const json ready = text_of(out[0]);
  CHECK(ready["type"] == "ready");
  CHECK(ready["engine_rate"] == 48000);
  CHECK(ready["samples_per_update"] == 384);
  CHECK(ready["fragment_width_mm"] == 48.0);
  CHECK(ready["friction_N"] == 0.14);
  CHECK(ready["signal"] == "pilot");

  out = p.on_text(move(0, 0));
  REQUIRE(out.size() == 2);
  CHECK(text_of(out[0])["friction_N"] == 0.14);
  CHECK(out[1].binary);
  CHECK(decode_audio_frame(out[1].payload).size() == 384);
}

TEST_CASE("config validation", "[session]") {
  ProtocolSession p(registry());
  auto out = p.on_text(R"({"type":"config","preset":2,"engine_rate":44100})");
  CHECK(text_of(out[0])["code"] == "invalid-argument");
  CHECK_FALSE(p.configured());
  CHECK_FALSE(p.closed());

  out = p.on_text(R"({"type":"config","preset":9})");
  CHECK(text_of(out[0])["code"] == "invalid-argument");
  out = p.on_text(R"({"type":"config","signal":"sig-missing"})");
  CHECK(text_of(out[0])["code"] == "invalid-argument");

  out = p.on_text(R"({"type":"config","preset":3})");
  CHECK(text_of(out[0])["fragment_width_mm"] == 3000.0);
  out = p.on_text(R"({"type":"config","samples_per_mm":1000,"origin_mm":2})");
  const json ready = text_of(out[0]);
  CHECK(ready["fragment_width_mm"] == 24.0);
  CHECK(ready["preset"].is_null());
}

TEST_CASE("moves outside the fragment are silent", "[session]") {
  SignalRegistry reg;
  SessionConfig cfg;
  cfg.origin_mm = 10.0;
  Session s = Session::open(cfg, reg);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto out = s.handle_move({i, {-5, 3}});
    for (float a : decode_audio_frame(out.audio_binary)) REQUIRE(a == 0.0f);
    REQUIRE(out.frame.friction_N == 0.14);
  }
}

TEST_CASE("live frames carry the expected tone", "[session]") {
  SignalRegistry reg;
  Session s = Session::open(SessionConfig{}, reg);
  std::vector<double> audio;
  for (std::uint64_t i = 0; i < 21; ++i) {
    const auto out = s.handle_move({i, {100, 0}});
    CHECK(out.frame.speed_mm_s == Catch::Approx(249.6));  // snapped to the 2.6 mm/s grid
    CHECK(out.frame.position_mm == Catch::Approx((i + 1) * 2.0));
    if (i == 0) continue;  // skip the delay onset
    const auto frame = decode_audio_frame(out.audio_binary);
    audio.insert(audio.end(), frame.begin(), frame.end());
  }
  // 250 mm/s at 500 samples/mm over 100-sample cycles.
  CHECK(oracle::fft_peak_hz(audio, 48000.0) == Catch::Approx(1250.0).margin(1e-9));
}

TEST_CASE("friction off holds the baseline", "[session]") {
  SignalRegistry reg;
  SessionConfig cfg;
  cfg.friction_enabled = false;
  Session s = Session::open(cfg, reg);
  for (std::uint64_t i = 0; i < 10; ++i) {
    REQUIRE(s.handle_move({i, {50, 0}}).frame.friction_N == 0.14);
  }
}

TEST_CASE("out-of-order sequence faults the session", "[session]") {
  ProtocolSession p(registry());
  p.on_text(R"({"type":"config"})");
  CHECK(p.on_text(move(7, 1)).size() == 2);  // first seq is arbitrary
  CHECK(p.on_text(move(8, 1)).size() == 2);
  auto out = p.on_text(move(10, 1));
  REQUIRE(out.size() == 1);
  CHECK(text_of(out[0])["code"] == "session-fault");
  CHECK(p.closed());
  CHECK(p.on_text(move(11, 1)).empty());

  SignalRegistry reg;
  Session s = Session::open(SessionConfig{}, reg);
  s.handle_move({0, {}});
  CHECK_THROWS_AS(s.handle_move({0, {}}), Error);
}

TEST_CASE("malformed messages are protocol errors", "[session]") {
  ProtocolSession p(registry());
  for (const char* bad : {"not json", "[1,2]", R"({"type":"warp"})",
                          R"({"type":"move","seq":0,"dx_counts":1})"}) {
    INFO(bad);
    const auto out = p.on_text(bad);
    REQUIRE(out.size() == 1);
    CHECK(text_of(out[0])["code"] == "protocol-error");
  }
  p.on_text(R"({"type":"config"})");
  for (const char* bad : {R"({"type":"move","seq":0})", R"({"type":"move","seq":-1,"dx_counts":1})",
                          R"({"type":"move","seq":0,"dx_counts":1.5})",
                          R"({"type":"config","preset":"two"})"}) {
    INFO(bad);
    CHECK(text_of(p.on_text(bad)[0])["code"] == "protocol-error");
  }
  CHECK(text_of(p.on_binary("\x01")[0])["code"] == "protocol-error");
  CHECK_FALSE(p.closed());
}

TEST_CASE("audio frame encoding", "[session]") {
  const std::vector<double> audio{0.0, 0.5, -1.0, 0.25};
  const std::string bin = encode_audio_frame(audio);
  REQUIRE(bin.size() == 5 + 16);
  CHECK(static_cast<unsigned char>(bin[0]) == kAudioFrameTag);
  CHECK(static_cast<unsigned char>(bin[1]) == 4);
  CHECK(bin[2] == 0);
  const auto back = decode_audio_frame(bin);
  REQUIRE(back.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(back[i] == static_cast<float>(audio[i]));
  CHECK_THROWS_AS(decode_audio_frame(bin.substr(0, 10)), Error);
  CHECK_THROWS_AS(decode_audio_frame("\x02\x00\x00\x00\x00"), Error);
}

TEST_CASE("frame json fields", "[session]") {
  const json j = json::parse(encode_frame_json({3, 0.032, 1.5, 187.2, 0.45}));
  CHECK(j["type"] == "frame");
  CHECK(j["seq"] == 3);
  CHECK(j["t_s"] == 0.032);
  CHECK(j["speed_mm_s"] == 187.2);
  CHECK(j["friction_N"] == 0.45);
}

TEST_CASE("flow gate pauses at depth and resumes on drain", "[session]") {
  FlowGate g(3);
  g.frame_queued();
  g.frame_queued();
  CHECK_FALSE(g.paused());
  g.frame_queued();
  CHECK(g.paused());
  g.frame_sent();
  CHECK_FALSE(g.paused());
  CHECK(g.queued() == 2);
  g.frame_sent();
  g.frame_sent();
  g.frame_sent();
  CHECK(g.queued() == 0);
  CHECK(FlowGate{}.depth() == kMaxQueuedFrames);
}

TEST_CASE("signal registry ids are content derived", "[session]") {
  SignalRegistry reg;
  REQUIRE(reg.find("pilot"));
  CHECK(reg.find("pilot")->size() == 24000);
  const std::string a = reg.add(SignalBuffer({0.f, 0.5f, 1.f, 0.5f}));
  const std::string b = reg.add(SignalBuffer({0.f, 0.5f, 1.f, 0.5f}));
  const std::string c = reg.add(SignalBuffer({0.f, 0.5f, 1.f, 0.25f}));
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.rfind("sig-", 0) == 0);
  CHECK(reg.find(a)->size() == 4);
  CHECK_FALSE(reg.find("sig-0000"));
}
