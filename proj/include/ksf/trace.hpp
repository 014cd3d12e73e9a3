#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ksf/motion.hpp"
#include "ksf/pipeline.hpp"

namespace ksf {

inline constexpr const char* kVersion = "1.0.0";

/// Per-update telemetry. t_s is the end of the update interval, when
/// position_mm is reached.
struct UpdateRow {
  double t_s = 0.0;
  std::int64_t dx_counts = 0;
  std::int64_t dy_counts = 0;
  double position_mm = 0.0;
  double speed_mm_s = 0.0;
};

/// Integrator state after each closed-loop simulation step.
struct PuckRow {
  double t_s = 0.0;
  double position_mm = 0.0;
  double velocity_mm_s = 0.0;
  double applied_N = 0.0;
  double friction_N = 0.0;
};

struct TraceMetadata {
  double samples_per_mm = 0.0;
  double origin_mm = 0.0;
  std::optional<int> preset_id;
  std::string signal_descriptor;
  std::size_t signal_length = 0;
  bool friction_enabled = true;
};

struct Trace {
  explicit Trace(EngineRate r) : rate(r) {}

  EngineRate rate;
  std::vector<double> audio;      // post-delay
  std::vector<double> friction;   // command stream
  std::vector<double> positions;  // engine-rate reconstructed position
  std::vector<UpdateRow> updates;
  std::vector<PuckRow> puck;      // closed-loop runs only
  TraceMetadata meta;

  void append(const DisplacementUpdate& update, const StepResult& step);
};

/// One row per millisecond of engine samples. Stream values are bin means
/// (RMS for audio); position and speed are sampled at the bin's last sample.
struct DecimatedRow {
  double t_s = 0.0;
  double position_mm = 0.0;
  double speed_mm_s = 0.0;
  double audio_rms_1ms = 0.0;
  double friction_N = 0.0;
};

std::vector<DecimatedRow> decimate(const Trace& trace);

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<DecimatedRow>& rows);
std::vector<DecimatedRow> read_trace_csv(const std::filesystem::path& path);

struct TraceFiles {
  std::filesystem::path audio_wav;
  std::filesystem::path friction_f32;
  std::filesystem::path trace_csv;
  std::filesystem::path meta_json;
  std::optional<std::filesystem::path> puck_csv;
};

/// Writes `<prefix>.audio.wav`, `<prefix>.friction.f32`, `<prefix>.trace.csv`,
/// `<prefix>.meta.json` and, when the trace has puck rows, `<prefix>.puck.csv`.
/// `extra_meta_json` (a serialized JSON object, may be empty) is merged into
/// the metadata.
TraceFiles write_trace_files(const Trace& trace, const std::string& prefix,
                             const std::string& extra_meta_json = {});

/// Shortest decimal string that round-trips through from_chars.
std::string format_double(double value);

}  // namespace ksf
