#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ksf/friction.hpp"
#include "ksf/motion.hpp"
#include "ksf/signal.hpp"
#include "ksf/sonify.hpp"

namespace ksf {

struct PipelineConfig {
  EngineRate rate{192000};
  SpatialMapping mapping{};
  bool friction_enabled = true;
  ForceMapping force_mapping{};
  double friction_off_N = kDeviceMinForceN;
};

/// Output of one 8 ms step. The spans point into the pipeline and stay valid
/// until the next call to step().
struct StepResult {
  MotionState motion;
  std::span<const double> positions;
  std::span<const double> audio;     // post-delay, what the listener hears
  std::span<const double> friction;  // command stream, computed from undelayed audio
  double final_friction_N = kDeviceMinForceN;
};

/// The complete per-update conversion chain: position reconstruction, buffer
/// readout, envelope-to-force conversion and audio delay. Offline rendering,
/// the closed-loop simulator and live sessions all drive this one class.
class RenderPipeline {
 public:
  RenderPipeline(std::shared_ptr<const SignalBuffer> signal, PipelineConfig config);

  const StepResult& step(const DisplacementUpdate& update);

  const PipelineConfig& config() const noexcept { return config_; }
  const SignalBuffer& signal() const noexcept { return *signal_; }
  const MotionState& motion() const noexcept { return tracker_.state(); }
  double last_friction_N() const noexcept { return result_.final_friction_N; }

 private:
  std::shared_ptr<const SignalBuffer> signal_;
  PipelineConfig config_;
  MotionTracker tracker_;
  FrictionRenderer friction_;
  DelayLine audio_delay_;
  std::vector<double> positions_;
  std::vector<double> raw_audio_;
  std::vector<double> audio_;
  std::vector<double> friction_out_;
  StepResult result_;
};

}  // namespace ksf
