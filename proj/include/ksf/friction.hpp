#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ksf/motion.hpp"

namespace ksf {

inline constexpr double kDeviceMinForceN = 0.14;
inline constexpr double kDeviceMaxForceN = 1.4;

/// Mean absolute amplitude over the most recent `window` samples, history
/// zero-filled at construction. The running sum is recomputed from the ring
/// each time the ring wraps, which bounds accumulated rounding error.
class EnvelopeFollower {
 public:
  explicit EnvelopeFollower(std::size_t window);

  /// Pushes a[t] and returns a_mu[t].
  double push(double sample) noexcept;
  double current() const noexcept { return sum_ / static_cast<double>(ring_.size()); }

  std::size_t window() const noexcept { return ring_.size(); }
  double running_sum() const noexcept { return sum_; }
  double recomputed_sum() const noexcept;

 private:
  std::vector<double> ring_;
  std::size_t head_ = 0;
  double sum_ = 0.0;
};

/// Free-function form of EnvelopeFollower::push.
inline double window_avg(EnvelopeFollower& state, double new_sample) noexcept {
  return state.push(new_sample);
}

/// Level-to-force map: log level relative to `a_ref`, clipped to
/// [db_floor, db_ceiling] and mapped linearly onto [force_floor_N, force_ceiling_N].
struct ForceMapping {
  double db_floor = -30.0;
  double db_ceiling = 0.0;
  double force_floor_N = 0.14;
  double force_ceiling_N = 0.5;
  double a_ref = 1.0;

  double operator()(double a_mu) const noexcept;
};

/// ForceMapping with the default [-30, 0] dB -> [0.14, 0.5] N span.
double force_map(double a_mu) noexcept;

double clamp_device(double force_N) noexcept;

/// Fixed integer-sample delay, zero-filled at start.
class DelayLine {
 public:
  explicit DelayLine(std::size_t delay);

  double push(double sample) noexcept;
  std::size_t delay() const noexcept { return ring_.size(); }

 private:
  std::vector<double> ring_;
  std::size_t head_ = 0;
};

struct AlignedStreams {
  std::vector<double> audio;
  std::vector<double> friction;
};

/// Delays audio by round(0.001 * rate) samples; friction passes unshifted.
/// Both inputs must have the same length.
AlignedStreams align_streams(std::span<const double> audio,
                             std::span<const double> friction, EngineRate rate);

struct ForceCommand {
  double force_N = kDeviceMinForceN;
};

/// Per-sample audio -> friction conversion: envelope, level map and device
/// clamp. With friction disabled the output is a constant `off_level_N`
/// (device floor by default) but the envelope still runs.
class FrictionRenderer {
 public:
  FrictionRenderer(EngineRate rate, ForceMapping mapping = {}, bool enabled = true,
                   double off_level_N = kDeviceMinForceN);

  ForceCommand process(double audio_sample) noexcept;

  bool enabled() const noexcept { return enabled_; }
  const EnvelopeFollower& envelope() const noexcept { return envelope_; }

 private:
  EnvelopeFollower envelope_;
  ForceMapping mapping_;
  bool enabled_;
  double off_level_N_;
};

}  // namespace ksf
