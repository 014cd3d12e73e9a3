#include "ksf/pipeline.hpp"

#include "ksf/error.hpp"

namespace ksf {

RenderPipeline::RenderPipeline(std::shared_ptr<const SignalBuffer> signal,
                               PipelineConfig config)
    : signal_(std::move(signal)),
      config_(config),
      friction_(config.rate, config.force_mapping, config.friction_enabled,
                config.friction_off_N),
      audio_delay_(config.rate.samples_per_ms()) {
  if (!signal_) throw Error(ErrorCode::invalid_argument, "pipeline needs a signal");
  const std::size_t k = config_.rate.samples_per_update();
  positions_.resize(k);
  raw_audio_.resize(k);
  audio_.resize(k);
  friction_out_.resize(k);
  result_.final_friction_N = friction_.enabled() ? kDeviceMinForceN
                                                 : clamp_device(config_.friction_off_N);
}

const StepResult& RenderPipeline::step(const DisplacementUpdate& update) {
  const double prev_mm = tracker_.state().position_mm;
  const MotionState motion = tracker_.apply(update);

  // Interpolate between the count-exact endpoints so the interval always ends
  // on the tracker's position.
  reconstruct_positions_into(prev_mm, motion.position_mm - prev_mm, positions_);
  positions_.back() = motion.position_mm;

  render_audio_into(positions_, config_.mapping, *signal_, raw_audio_);
  for (std::size_t j = 0; j < raw_audio_.size(); ++j) {
    friction_out_[j] = friction_.process(raw_audio_[j]).force_N;
    audio_[j] = audio_delay_.push(raw_audio_[j]);
  }

  result_.motion = motion;
  result_.positions = positions_;
  result_.audio = audio_;
  result_.friction = friction_out_;
  result_.final_friction_N = friction_out_.back();
  return result_;
}

}  // namespace ksf
