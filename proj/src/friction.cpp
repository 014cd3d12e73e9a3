#include "ksf/friction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ksf/error.hpp"

namespace ksf {

EnvelopeFollower::EnvelopeFollower(std::size_t window) : ring_(window, 0.0) {
  if (window == 0) throw Error(ErrorCode::invalid_argument, "envelope window must be > 0");
}

double EnvelopeFollower::push(double sample) noexcept {
  const double magnitude = std::abs(sample);
  sum_ += magnitude - ring_[head_];
  ring_[head_] = magnitude;
  if (++head_ == ring_.size()) {
    head_ = 0;
    sum_ = recomputed_sum();
  }
  return current();
}

double EnvelopeFollower::recomputed_sum() const noexcept {
  return std::accumulate(ring_.begin(), ring_.end(), 0.0);
}

double ForceMapping::operator()(double a_mu) const noexcept {
  if (!(a_mu > 0.0)) return force_floor_N;
  const double level_db = std::clamp(20.0 * std::log10(a_mu / a_ref), db_floor, db_ceiling);
  const double fraction = (level_db - db_floor) / (db_ceiling - db_floor);
  return force_floor_N + fraction * (force_ceiling_N - force_floor_N);
}

double force_map(double a_mu) noexcept { return ForceMapping{}(a_mu); }

double clamp_device(double force_N) noexcept {
  return std::min(kDeviceMaxForceN, std::max(kDeviceMinForceN, force_N));
}

DelayLine::DelayLine(std::size_t delay) : ring_(delay, 0.0) {
  if (delay == 0) throw Error(ErrorCode::invalid_argument, "delay must be > 0");
}

double DelayLine::push(double sample) noexcept {
  const double out = ring_[head_];
  ring_[head_] = sample;
  if (++head_ == ring_.size()) head_ = 0;
  return out;
}

AlignedStreams align_streams(std::span<const double> audio,
                             std::span<const double> friction, EngineRate rate) {
  if (audio.size() != friction.size()) {
    throw Error(ErrorCode::invalid_argument, "audio and friction lengths differ");
  }
  const std::size_t delay = std::min(rate.samples_per_ms(), audio.size());
  AlignedStreams out;
  out.audio.assign(audio.size(), 0.0);
  std::copy(audio.begin(), audio.end() - static_cast<std::ptrdiff_t>(delay),
            out.audio.begin() + static_cast<std::ptrdiff_t>(delay));
  out.friction.assign(friction.begin(), friction.end());
  return out;
}

FrictionRenderer::FrictionRenderer(EngineRate rate, ForceMapping mapping, bool enabled,
                                   double off_level_N)
    : envelope_(rate.samples_per_ms()),
      mapping_(mapping),
      enabled_(enabled),
      off_level_N_(clamp_device(off_level_N)) {}

ForceCommand FrictionRenderer::process(double audio_sample) noexcept {
  const double a_mu = envelope_.push(audio_sample);
  if (!enabled_) return {off_level_N_};
  return {clamp_device(mapping_(a_mu))};
}

}  // namespace ksf
