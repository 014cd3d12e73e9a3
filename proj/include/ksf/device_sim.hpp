#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "ksf/pipeline.hpp"
#include "ksf/trace.hpp"

namespace ksf {

struct PuckState {
  double position_mm = 0.0;
  double velocity_mm_s = 0.0;
  double time_s = 0.0;
};

struct SimConfig {
  double mass_kg = 0.1;
  double step_s = 0.001;
  bool stiction_equals_kinetic = true;
  /// Breakaway threshold as a multiple of the kinetic command; only used
  /// when stiction_equals_kinetic is false.
  double static_ratio = 1.0;

  /// Throws invalid_argument on non-positive mass/step or a step that does
  /// not divide the 8 ms update interval.
  void validate() const;
  std::size_t steps_per_update() const;
};

/// One semi-implicit Euler step of a puck under applied force and Coulomb
/// friction. Velocity never changes sign inside a step: a zero crossing stops
/// the puck and the position advance is cut at the crossing.
/// Throws invalid_argument if friction_N lies outside [0.14, 1.4].
PuckState step(const PuckState& state, double applied_N, double friction_N,
               const SimConfig& config);

/// Piecewise-constant applied-force profile; each value holds until the next
/// row.
class ForceProfile {
 public:
  struct Point {
    double t_s;
    double force_N;
  };

  /// Points must be non-empty, start at t = 0 and be strictly increasing.
  explicit ForceProfile(std::vector<Point> points);
  static ForceProfile constant(double force_N);

  double at(double t_s) const noexcept;
  double last_time() const noexcept { return points_.back().t_s; }
  const std::vector<Point>& points() const noexcept { return points_; }

 private:
  std::vector<Point> points_;
};

/// CSV with header `t_s,F_app_N`.
ForceProfile parse_force_profile_csv(std::istream& in);
ForceProfile read_force_profile_csv(const std::filesystem::path& path);

struct ClosedLoopOptions {
  double duration_s = 1.0;
  EngineRate rate{192000};
  bool friction_enabled = true;
  ForceMapping force_mapping{};
  double friction_off_N = kDeviceMinForceN;
};

struct ClosedLoopResult {
  explicit ClosedLoopResult(EngineRate rate) : trace(rate) {}

  Trace trace;
  std::vector<DisplacementUpdate> updates;  // replayable through render_offline
  PuckState final_state;
  /// Times at which the reported device position first reached the fragment
  /// start and end.
  std::optional<double> fragment_enter_s;
  std::optional<double> fragment_exit_s;

  std::optional<double> traversal_time_s() const {
    if (!fragment_enter_s || !fragment_exit_s) return std::nullopt;
    return *fragment_exit_s - *fragment_enter_s;
  }
};

/// Closes the loop between the puck and the render pipeline. Each 8 ms frame
/// integrates with the friction command left by the previous frame, reports
/// the quantized displacement to the pipeline, and takes the frame's final
/// friction command for the next frame. The puck starts at rest at 0 mm.
ClosedLoopResult run_closed_loop(const ForceProfile& profile,
                                 std::shared_ptr<const SignalBuffer> signal,
                                 const SpatialMapping& mapping, const SimConfig& sim,
                                 const ClosedLoopOptions& options);

}  // namespace ksf
