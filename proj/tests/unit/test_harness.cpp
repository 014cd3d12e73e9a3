#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "ksf/audio_io.hpp"
#include "ksf/error.hpp"
#include "ksf/harness.hpp"
#include "ksf/presets.hpp"
#include "support/oracles.hpp"

using namespace ksf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir =
      fs::temp_directory_path() / ("ksf_harness_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int run_cli(const std::string& args, const fs::path& out, const fs::path& err) {
  const std::string cmd = std::string(KSF_CLI_PATH) + " " + args + " >" + out.string() +
                          " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("mapping table rows", "[harness]") {
  const auto rows = table1_report();
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].cycle_width_mm == Catch::Approx(0.025));
  CHECK(rows[0].fragment_width_mm == Catch::Approx(6.0));
  CHECK(rows[0].min_frequency_hz == Catch::Approx(104.0));
  CHECK(rows[0].max_frequency_hz == Catch::Approx(13360.0));
  CHECK(rows[1].fragment_width_mm == Catch::Approx(48.0));
  CHECK(rows[1].min_frequency_hz == Catch::Approx(13.0));
  CHECK(rows[2].cycle_width_mm == Catch::Approx(12.5));
  CHECK(rows[2].fragment_width_mm == Catch::Approx(3000.0));
  CHECK(rows[2].max_frequency_hz == Catch::Approx(26.72));
  for (const auto& r : rows) {
    INFO("mapping " << r.mapping_id);
    CHECK(r.cycle_width_shown == r.reference_cycle_width);
    CHECK(r.fragment_width_shown == r.reference_fragment_width);
    CHECK(r.frequency_range_shown == r.reference_frequency_range);
  }
}

TEST_CASE("pilot materials", "[harness]") {
  const fs::path dir = scratch("pilot");
  const PilotMaterials m = make_pilot_materials(dir);
  const SignalBuffer sig = load_signal(m.signal_wav);
  CHECK(sig.size() == 24000);
  CHECK(sig == pilot_fragment());
  CHECK(m.presets.size() == 3);
  REQUIRE(m.conditions.size() == 6);

  const auto p3 = nlohmann::json::parse(slurp(dir / "mapping_3.json"));
  CHECK(p3["fragment_width_mm"].get<double>() == 3000.0);
  const auto index = nlohmann::json::parse(slurp(dir / "conditions.json"));
  REQUIRE(index.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(index[i]["order"].get<int>() == static_cast<int>(i + 1));
    CHECK(index[i]["friction_enabled"].get<bool>() == (i % 2 == 1));
  }
  const auto demo = read_trajectory_csv(m.demo_trajectory);
  CHECK(demo.size() == 250);
}

TEST_CASE("offline render of a still trajectory is silent", "[harness]") {
  const fs::path dir = scratch("still");
  const auto m = make_pilot_materials(dir);
  write_trajectory_csv(dir / "zero.csv", constant_trajectory(0, 50));

  RenderRequest req;
  req.signal_path = m.signal_wav;
  req.trajectory_path = dir / "zero.csv";
  req.mapping = mapping_preset(2).mapping(5.0);
  req.preset_id = 2;
  req.out_prefix = (dir / "still").string();
  const RenderOutput out = render_offline(req);

  const WavData wav = decode_wav_f32(read_file_bytes(out.files.audio_wav));
  CHECK(wav.sample_rate == 192000);
  CHECK(wav.samples.size() == 50 * 1536);
  for (float a : wav.samples) REQUIRE(a == 0.0f);
  for (float f : oracle::read_f32(out.files.friction_f32.c_str())) REQUIRE(f == 0.14f);
}

TEST_CASE("offline render frequency follows speed", "[harness]") {
  const fs::path dir = scratch("tone");
  const auto m = make_pilot_materials(dir);
  RenderRequest req;
  req.signal_path = m.signal_wav;
  req.trajectory_path = m.demo_trajectory;  // 25 mm/s
  req.mapping = mapping_preset(2).mapping();
  req.out_prefix = (dir / "tone").string();
  const RenderOutput out = render_offline(req);

  const WavData wav = decode_wav_f32(read_file_bytes(out.files.audio_wav));
  std::vector<double> window(wav.samples.begin() + 19200, wav.samples.begin() + 19200 + 192000);
  // 25 mm/s * 500 samples/mm / 100 samples per cycle.
  CHECK(oracle::fft_peak_hz(window, 192000.0) == Catch::Approx(125.0).margin(1e-9));

  const auto meta = nlohmann::json::parse(slurp(out.files.meta_json));
  CHECK(meta["trajectory"] == "demo_trajectory.csv");
}

TEST_CASE("trace CSV round trips exactly", "[harness]") {
  const fs::path dir = scratch("csv");
  PipelineConfig cfg;
  cfg.rate = EngineRate(48000);
  cfg.mapping = mapping_preset(2).mapping();
  const auto sig = std::make_shared<const SignalBuffer>(pilot_fragment());
  const Trace t = render_trace(sig, constant_trajectory(7, 40), cfg);
  const auto rows = decimate(t);
  REQUIRE(rows.size() == 40 * 8);
  write_trace_csv(dir / "t.csv", rows);
  const auto back = read_trace_csv(dir / "t.csv");
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(back[i].t_s == rows[i].t_s);
    REQUIRE(back[i].position_mm == rows[i].position_mm);
    REQUIRE(back[i].speed_mm_s == rows[i].speed_mm_s);
    REQUIRE(back[i].audio_rms_1ms == rows[i].audio_rms_1ms);
    REQUIRE(back[i].friction_N == rows[i].friction_N);
  }
}

TEST_CASE("decimated friction equals the bin mean", "[harness][property]") {
  PipelineConfig cfg;
  cfg.rate = EngineRate(48000);
  cfg.mapping = mapping_preset(2).mapping();
  const auto sig = std::make_shared<const SignalBuffer>(pilot_fragment());
  const Trace t = render_trace(sig, constant_trajectory(9, 60), cfg);
  const auto rows = decimate(t);
  const std::size_t n = 48;
  for (std::size_t b = 0; b < rows.size(); ++b) {
    double f = 0.0, e = 0.0;
    for (std::size_t i = b * n; i < (b + 1) * n; ++i) {
      f += t.friction[i];
      e += t.audio[i] * t.audio[i];
    }
    REQUIRE(rows[b].friction_N == Catch::Approx(f / n).margin(1e-6));
    REQUIRE(rows[b].audio_rms_1ms == Catch::Approx(std::sqrt(e / n)).margin(1e-6));
    REQUIRE(rows[b].t_s == Catch::Approx((b + 1) * 0.001).margin(1e-12));
  }
}

TEST_CASE("command line tool", "[harness][cli]") {
  const fs::path dir = scratch("cli");
  SECTION("table1 json") {
    REQUIRE(run_cli("table1 --json", dir / "out.json", dir / "err.txt") == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "out.json"));
    REQUIRE(j.size() == 3);
    for (const auto& row : j) CHECK(row["matches"].get<bool>());
  }
  SECTION("malformed trajectory reports the line") {
    make_pilot_materials(dir);
    std::ofstream(dir / "bad.csv") << "update_index,dx_counts,dy_counts\n0,1,0\n1,x,0\n";
    const std::string args = "render --signal " + (dir / "pilot_signal.wav").string() +
                             " --trajectory " + (dir / "bad.csv").string() + " --out " +
                             (dir / "bad").string();
    REQUIRE(run_cli(args, dir / "out.txt", dir / "err.json") == 1);
    const auto err = nlohmann::json::parse(slurp(dir / "err.json"));
    CHECK(err["error"] == "malformed-input");
    CHECK(err["line"] == 3);
  }
  SECTION("missing signal file") {
    const std::string args = "render --signal " + (dir / "nope.wav").string() +
                             " --trajectory " + (dir / "nope.csv").string() + " --out " +
                             (dir / "x").string();
    REQUIRE(run_cli(args, dir / "out.txt", dir / "err.json") == 1);
    CHECK(nlohmann::json::parse(slurp(dir / "err.json"))["error"] == "file-not-found");
  }
  SECTION("render from a condition file") {
    const auto m = make_pilot_materials(dir);
    const std::string args = "render --config " + m.conditions[3].string() +
                             " --trajectory " + m.demo_trajectory.string() + " --out " +
                             (dir / "cond").string();
    REQUIRE(run_cli(args, dir / "out.txt", dir / "err.txt") == 0);
    const auto meta = nlohmann::json::parse(slurp(dir / "cond.meta.json"));
    CHECK(meta["mapping"]["preset"] == 2);
    CHECK(meta["friction_enabled"] == true);
  }
}
