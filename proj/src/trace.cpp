#include "ksf/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ksf/audio_io.hpp"
#include "ksf/error.hpp"

namespace ksf {

void Trace::append(const DisplacementUpdate& update, const StepResult& step) {
  positions.insert(positions.end(), step.positions.begin(), step.positions.end());
  audio.insert(audio.end(), step.audio.begin(), step.audio.end());
  friction.insert(friction.end(), step.friction.begin(), step.friction.end());
  updates.push_back({static_cast<double>(step.motion.update_index + 1) * kUpdateIntervalS,
                     update.dx_counts, update.dy_counts, step.motion.position_mm,
                     step.motion.speed_mm_s});
}

std::vector<DecimatedRow> decimate(const Trace& trace) {
  const std::size_t bin = trace.rate.samples_per_ms();
  const std::size_t per_update = trace.rate.samples_per_update();
  const std::size_t bins = trace.audio.size() / bin;
  std::vector<DecimatedRow> rows;
  rows.reserve(bins);
  for (std::size_t m = 0; m < bins; ++m) {
    const std::size_t begin = m * bin;
    const std::size_t last = begin + bin - 1;
    double sq = 0.0;
    double force = 0.0;
    for (std::size_t g = begin; g <= last; ++g) {
      sq += trace.audio[g] * trace.audio[g];
      force += trace.friction[g];
    }
    DecimatedRow row;
    row.t_s = static_cast<double>(last + 1) / trace.rate.hz();
    row.position_mm = trace.positions[last];
    row.speed_mm_s = trace.updates[last / per_update].speed_mm_s;
    row.audio_rms_1ms = std::sqrt(sq / static_cast<double>(bin));
    row.friction_N = force / static_cast<double>(bin);
    rows.push_back(row);
  }
  return rows;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<DecimatedRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << "t_s,position_mm,speed_mm_s,audio_rms_1ms,friction_N\n";
  for (const auto& r : rows) {
    out << format_double(r.t_s) << ',' << format_double(r.position_mm) << ','
        << format_double(r.speed_mm_s) << ',' << format_double(r.audio_rms_1ms) << ','
        << format_double(r.friction_N) << '\n';
  }
}

namespace {

double parse_double(std::string_view field, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::malformed_input,
                "line " + std::to_string(line) + ": not a number: '" +
                    std::string(field) + "'",
                line);
  }
  return value;
}

}  // namespace

std::vector<DecimatedRow> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::file_not_found, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "t_s,position_mm,speed_mm_s,audio_rms_1ms,friction_N") {
    throw Error(ErrorCode::malformed_input, "line 1: unexpected trace header", 1);
  }
  std::vector<DecimatedRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double v[5];
    std::string_view rest = line;
    for (int i = 0; i < 5; ++i) {
      const auto comma = rest.find(',');
      if ((i < 4) == (comma == std::string_view::npos)) {
        throw Error(ErrorCode::malformed_input,
                    "line " + std::to_string(line_no) + ": expected 5 fields", line_no);
      }
      v[i] = parse_double(rest.substr(0, comma), line_no);
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
    rows.push_back({v[0], v[1], v[2], v[3], v[4]});
  }
  return rows;
}

TraceFiles write_trace_files(const Trace& trace, const std::string& prefix,
                             const std::string& extra_meta_json) {
  TraceFiles files{prefix + ".audio.wav", prefix + ".friction.f32", prefix + ".trace.csv",
                   prefix + ".meta.json", std::nullopt};

  const std::vector<float> audio(trace.audio.begin(), trace.audio.end());
  const std::vector<float> friction(trace.friction.begin(), trace.friction.end());
  write_file_bytes(files.audio_wav,
                   encode_wav_f32(audio, static_cast<std::uint32_t>(trace.rate.hz())));
  write_file_bytes(files.friction_f32, encode_raw_f32(friction));
  write_trace_csv(files.trace_csv, decimate(trace));

  if (!trace.puck.empty()) {
    files.puck_csv = prefix + ".puck.csv";
    std::ofstream out(*files.puck_csv, std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + files.puck_csv->string());
    out << "t_s,position_mm,velocity_mm_s,applied_N,friction_N\n";
    for (const auto& p : trace.puck) {
      out << format_double(p.t_s) << ',' << format_double(p.position_mm) << ','
          << format_double(p.velocity_mm_s) << ',' << format_double(p.applied_N) << ','
          << format_double(p.friction_N) << '\n';
    }
  }

  nlohmann::ordered_json meta;
  meta["engine_rate"] = trace.rate.hz();
  meta["samples_per_update"] = trace.rate.samples_per_update();
  meta["envelope_window_samples"] = trace.rate.samples_per_ms();
  meta["audio_delay_samples"] = trace.rate.samples_per_ms();
  meta["mapping"] = {{"samples_per_mm", trace.meta.samples_per_mm},
                     {"origin_mm", trace.meta.origin_mm},
                     {"fragment_width_mm",
                      static_cast<double>(trace.meta.signal_length) /
                          trace.meta.samples_per_mm}};
  if (trace.meta.preset_id) meta["mapping"]["preset"] = *trace.meta.preset_id;
  meta["signal"] = {{"source", trace.meta.signal_descriptor},
                    {"length", trace.meta.signal_length}};
  meta["friction_enabled"] = trace.meta.friction_enabled;
  meta["updates"] = trace.updates.size();
  meta["engine_samples"] = trace.audio.size();
  meta["files"] = {{"audio", files.audio_wav.filename().string()},
                   {"friction", files.friction_f32.filename().string()},
                   {"trace", files.trace_csv.filename().string()}};
  if (files.puck_csv) meta["files"]["puck"] = files.puck_csv->filename().string();
  meta["versions"] = {{"ksf", kVersion}};
  if (!extra_meta_json.empty()) {
    const auto extra = nlohmann::ordered_json::parse(extra_meta_json);
    for (const auto& [key, value] : extra.items()) meta[key] = value;
  }
  std::ofstream out(files.meta_json, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + files.meta_json.string());
  out << meta.dump(2) << '\n';
  return files;
}

}  // namespace ksf
