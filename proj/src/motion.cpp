#include "ksf/motion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string>

#include "ksf/error.hpp"

namespace ksf {

EngineRate::EngineRate(int hz) : hz_(hz), ms_samples_(0) {
  if (hz < 1000 || hz % kUpdateRateHz != 0) {
    throw Error(ErrorCode::invalid_argument,
                "engine rate " + std::to_string(hz) +
                    " Hz must be >= 1000 and divisible by 125");
  }
  ms_samples_ = static_cast<std::size_t>(std::lround(0.001 * hz));
}

std::int64_t quantize_displacement(double raw_dx_mm) noexcept {
  return static_cast<std::int64_t>(std::round(raw_dx_mm * kCountsPerMm));
}

double quantize_speed(double raw_speed_mm_s) noexcept {
  const double levels = std::round(raw_speed_mm_s / kSpeedStepMmS);
  return std::clamp(levels * kSpeedStepMmS, -kSpeedLimitMmS, kSpeedLimitMmS);
}

double derive_speed(const DisplacementUpdate& update) noexcept {
  return quantize_speed(update.dx_mm() / kUpdateIntervalS);
}

void reconstruct_positions_into(double prev_position_mm, double dx_mm,
                                std::vector<double>& out) {
  const std::size_t k = out.size();
  const double kd = static_cast<double>(k);
  for (std::size_t j = 1; j < k; ++j) {
    out[j - 1] = prev_position_mm + dx_mm * (static_cast<double>(j) / kd);
  }
  if (k > 0) out[k - 1] = prev_position_mm + dx_mm;
}

std::vector<double> reconstruct_positions(double prev_position_mm, double dx_mm,
                                          EngineRate rate) {
  std::vector<double> out(rate.samples_per_update());
  reconstruct_positions_into(prev_position_mm, dx_mm, out);
  return out;
}

std::vector<double> reconstruct_positions(double prev_position_mm,
                                          const DisplacementUpdate& update,
                                          EngineRate rate) {
  return reconstruct_positions(prev_position_mm, update.dx_mm(), rate);
}

MotionState MotionTracker::apply(const DisplacementUpdate& update) noexcept {
  x_counts_ += update.dx_counts;
  y_counts_ += update.dy_counts;
  state_.position_mm = static_cast<double>(x_counts_) * kCountMm;
  state_.speed_mm_s = derive_speed(update);
  state_.update_index = applied_;
  ++applied_;
  return state_;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::int64_t parse_int(std::string_view field, std::size_t line) {
  field = trim(field);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw Error(ErrorCode::malformed_input,
                "line " + std::to_string(line) + ": not an integer: '" +
                    std::string(field) + "'",
                line);
  }
  return value;
}

}  // namespace

std::vector<DisplacementUpdate> parse_trajectory_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::malformed_input, "empty trajectory file", 1);
  }
  ++line_no;
  if (trim(line) != "update_index,dx_counts,dy_counts") {
    throw Error(ErrorCode::malformed_input,
                "line 1: expected header update_index,dx_counts,dy_counts", 1);
  }

  std::vector<DisplacementUpdate> updates;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto c1 = row.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
    if (c2 == std::string_view::npos || row.find(',', c2 + 1) != std::string_view::npos) {
      throw Error(ErrorCode::malformed_input,
                  "line " + std::to_string(line_no) + ": expected 3 fields", line_no);
    }
    const auto index = parse_int(row.substr(0, c1), line_no);
    const auto dx = parse_int(row.substr(c1 + 1, c2 - c1 - 1), line_no);
    const auto dy = parse_int(row.substr(c2 + 1), line_no);
    if (index != static_cast<std::int64_t>(updates.size())) {
      throw Error(ErrorCode::cadence_violation,
                  "line " + std::to_string(line_no) + ": update_index " +
                      std::to_string(index) + " breaks the 125 Hz cadence (expected " +
                      std::to_string(updates.size()) + ")",
                  line_no);
    }
    updates.push_back({dx, dy});
  }
  return updates;
}

std::vector<DisplacementUpdate> read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::file_not_found, "cannot open " + path.string());
  return parse_trajectory_csv(in);
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<DisplacementUpdate>& updates) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << "update_index,dx_counts,dy_counts\n";
  for (std::size_t i = 0; i < updates.size(); ++i) {
    out << i << ',' << updates[i].dx_counts << ',' << updates[i].dy_counts << '\n';
  }
}

std::vector<DisplacementUpdate> constant_trajectory(std::int64_t dx_counts,
                                                    std::size_t n_updates) {
  return std::vector<DisplacementUpdate>(n_updates, DisplacementUpdate{dx_counts, 0});
}

}  // namespace ksf
