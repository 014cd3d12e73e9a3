#include "ksf/harness.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ksf/audio_io.hpp"
#include "ksf/error.hpp"
#include "ksf/presets.hpp"

namespace ksf {

namespace {

// Reference characterization of the three pilot mappings, as displayed.
struct DisplayedRow {
  int id;
  const char* cycle_width;     // mm
  const char* fragment_width;  // value and unit
  const char* fragment_unit;
  const char* f_min;
  const char* f_max;
};

constexpr DisplayedRow kDisplayed[] = {
    {1, "0.025", "6", "mm", "104", "13360"},
    {2, "0.2", "48", "mm", "13", "1670"},
    {3, "12.5", "3", "m", "0.2", "26.7"},
};

constexpr double kSlowestMmS = kSpeedStepMmS;
constexpr double kFastestMmS = kSpeedLimitMmS;

int decimals_of(std::string_view shown) {
  const auto dot = shown.find('.');
  return dot == std::string_view::npos ? 0 : static_cast<int>(shown.size() - dot - 1);
}

std::string format_like(double value, std::string_view shown) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals_of(shown), value);
  return buf;
}

}  // namespace

std::vector<Table1Row> table1_report() {
  constexpr double samples = static_cast<double>(kPilotCycles * kPilotSamplesPerCycle);
  constexpr double per_cycle = static_cast<double>(kPilotSamplesPerCycle);

  std::vector<Table1Row> rows;
  for (const DisplayedRow& shown_row : kDisplayed) {
    const MappingPreset& preset = mapping_preset(shown_row.id);
    Table1Row row;
    row.mapping_id = shown_row.id;
    row.samples_per_mm = preset.samples_per_mm;
    row.cycle_width_mm = per_cycle / preset.samples_per_mm;
    row.fragment_width_mm = samples / preset.samples_per_mm;
    row.min_frequency_hz = kSlowestMmS * preset.samples_per_mm / per_cycle;
    row.max_frequency_hz = kFastestMmS * preset.samples_per_mm / per_cycle;

    const std::string unit = shown_row.fragment_unit;
    row.reference_cycle_width = std::string(shown_row.cycle_width) + " mm";
    row.reference_fragment_width = std::string(shown_row.fragment_width) + " " + unit;
    row.reference_frequency_range =
        std::string(shown_row.f_min) + " - " + std::string(shown_row.f_max) + " Hz";

    const double width_in_unit =
        unit == "m" ? row.fragment_width_mm / 1000.0 : row.fragment_width_mm;
    row.cycle_width_shown = format_like(row.cycle_width_mm, shown_row.cycle_width) + " mm";
    row.fragment_width_shown = format_like(width_in_unit, shown_row.fragment_width) + " " + unit;
    row.frequency_range_shown = format_like(row.min_frequency_hz, shown_row.f_min) + " - " +
                                format_like(row.max_frequency_hz, shown_row.f_max) + " Hz";
    rows.push_back(std::move(row));
  }
  return rows;
}

Trace render_trace(std::shared_ptr<const SignalBuffer> signal,
                   const std::vector<DisplacementUpdate>& updates,
                   const PipelineConfig& config) {
  RenderPipeline pipeline(signal, config);
  Trace trace(config.rate);
  const std::size_t samples = updates.size() * config.rate.samples_per_update();
  trace.audio.reserve(samples);
  trace.friction.reserve(samples);
  trace.positions.reserve(samples);
  trace.updates.reserve(updates.size());
  for (const auto& u : updates) trace.append(u, pipeline.step(u));

  trace.meta.samples_per_mm = config.mapping.samples_per_mm;
  trace.meta.origin_mm = config.mapping.origin_mm;
  trace.meta.signal_length = signal->size();
  trace.meta.friction_enabled = config.friction_enabled;
  return trace;
}

RenderOutput render_offline(const RenderRequest& request) {
  auto signal = std::make_shared<const SignalBuffer>(load_signal(request.signal_path));
  const auto updates = read_trajectory_csv(request.trajectory_path);

  PipelineConfig config;
  config.rate = request.rate;
  config.mapping = request.mapping;
  config.friction_enabled = request.friction_enabled;

  RenderOutput out(request.rate);
  out.trace = render_trace(signal, updates, config);
  out.trace.meta.preset_id = request.preset_id;
  out.trace.meta.signal_descriptor = request.signal_path.filename().string();

  const nlohmann::json extra = {{"trajectory", request.trajectory_path.filename().string()}};
  out.files = write_trace_files(out.trace, request.out_prefix, extra.dump());
  return out;
}

PilotMaterials make_pilot_materials(const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + out_dir.string());

  PilotMaterials out;
  const SignalBuffer signal = pilot_fragment();
  out.signal_wav = out_dir / "pilot_signal.wav";
  // The WAV rate field carries no meaning for a spatial series.
  write_file_bytes(out.signal_wav, encode_wav_f32(signal.samples(), 192000));

  auto write_json = [](const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    f << j.dump(2) << '\n';
  };

  nlohmann::ordered_json index = nlohmann::ordered_json::array();
  int order = 0;
  for (const MappingPreset& preset : mapping_presets()) {
    const auto path = out_dir / ("mapping_" + std::to_string(preset.id) + ".json");
    write_json(path, {{"id", preset.id},
                      {"samples_per_mm", preset.samples_per_mm},
                      {"cycle_width_mm", 100.0 / preset.samples_per_mm},
                      {"fragment_width_mm", preset.mapping().fragment_width_mm(signal)}});
    out.presets.push_back(path);

    // Each mapping is presented without friction first, then with.
    for (const bool friction : {false, true}) {
      const std::string name = "condition_" + std::to_string(preset.id) +
                               (friction ? "_on" : "_off") + ".json";
      nlohmann::ordered_json cond = {{"order", ++order},
                                     {"mapping", preset.id},
                                     {"samples_per_mm", preset.samples_per_mm},
                                     {"origin_mm", 0.0},
                                     {"friction_enabled", friction},
                                     {"signal", out.signal_wav.filename().string()}};
      write_json(out_dir / name, cond);
      out.conditions.push_back(out_dir / name);
      cond["file"] = name;
      index.push_back(cond);
    }
  }
  write_json(out_dir / "conditions.json", index);

  // 10 counts per update = 25 mm/s for 2 s: 50 mm, enough to cross mapping 2.
  out.demo_trajectory = out_dir / "demo_trajectory.csv";
  write_trajectory_csv(out.demo_trajectory, constant_trajectory(10, 250));
  return out;
}

}  // namespace ksf
