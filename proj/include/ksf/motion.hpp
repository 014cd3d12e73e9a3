#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace ksf {

inline constexpr double kCountMm = 0.02;
inline constexpr double kCountsPerMm = 50.0;
inline constexpr int kUpdateRateHz = 125;
inline constexpr double kUpdateIntervalS = 0.008;
inline constexpr double kSpeedStepMmS = 2.6;
inline constexpr double kSpeedLimitMmS = 334.0;

/// Engine sample rate. Must be a multiple of the 125 Hz update rate so every
/// update interval spans a whole number of engine samples.
class EngineRate {
 public:
  explicit EngineRate(int hz);

  int hz() const noexcept { return hz_; }
  std::size_t samples_per_update() const noexcept { return hz_ / kUpdateRateHz; }
  /// round(0.001 * hz): the 1 ms envelope window and the audio delay.
  std::size_t samples_per_ms() const noexcept { return ms_samples_; }

  friend bool operator==(const EngineRate&, const EngineRate&) = default;

 private:
  int hz_;
  std::size_t ms_samples_;
};

/// One 8 ms report from the displacement sensor. dy is carried through to
/// traces but never drives the 1D mapping.
struct DisplacementUpdate {
  std::int64_t dx_counts = 0;
  std::int64_t dy_counts = 0;

  double dx_mm() const noexcept { return static_cast<double>(dx_counts) * kCountMm; }
  friend bool operator==(const DisplacementUpdate&, const DisplacementUpdate&) = default;
};

struct MotionState {
  double position_mm = 0.0;
  double speed_mm_s = 0.0;
  std::uint64_t update_index = 0;
};

/// Round half away from zero to whole 0.02 mm counts.
std::int64_t quantize_displacement(double raw_dx_mm) noexcept;

/// Nearest multiple of 2.6 mm/s, clamped to +-334 mm/s. The clamp value itself
/// is not on the grid.
double quantize_speed(double raw_speed_mm_s) noexcept;
double derive_speed(const DisplacementUpdate& update) noexcept;

/// Linear reconstruction over one update interval. Sample j (1-based, j = 1..K)
/// is prev + dx * j/K, and the last sample is exactly prev + dx.
std::vector<double> reconstruct_positions(double prev_position_mm, double dx_mm,
                                          EngineRate rate);
std::vector<double> reconstruct_positions(double prev_position_mm,
                                          const DisplacementUpdate& update,
                                          EngineRate rate);
void reconstruct_positions_into(double prev_position_mm, double dx_mm,
                                std::vector<double>& out);

/// Accumulates position in integer counts so long sessions do not drift.
class MotionTracker {
 public:
  MotionState apply(const DisplacementUpdate& update) noexcept;

  const MotionState& state() const noexcept { return state_; }
  std::int64_t x_counts() const noexcept { return x_counts_; }
  std::int64_t y_counts() const noexcept { return y_counts_; }
  std::uint64_t updates_applied() const noexcept { return applied_; }

 private:
  MotionState state_{};
  std::int64_t x_counts_ = 0;
  std::int64_t y_counts_ = 0;
  std::uint64_t applied_ = 0;
};

// Trajectory CSV: header `update_index,dx_counts,dy_counts`, one row per
// update, indices consecutive from 0.
std::vector<DisplacementUpdate> parse_trajectory_csv(std::istream& in);
std::vector<DisplacementUpdate> read_trajectory_csv(const std::filesystem::path& path);
void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<DisplacementUpdate>& updates);

/// `n_updates` identical updates of `dx_counts` each.
std::vector<DisplacementUpdate> constant_trajectory(std::int64_t dx_counts,
                                                    std::size_t n_updates);

}  // namespace ksf
