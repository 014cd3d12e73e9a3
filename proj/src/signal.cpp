#include "ksf/signal.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ksf/error.hpp"

namespace ksf {

SignalBuffer::SignalBuffer(std::vector<float> samples) : samples_(std::move(samples)) {
  if (samples_.size() < kMinLength) {
    throw Error(ErrorCode::invalid_argument,
                "signal needs at least 4 samples, got " + std::to_string(samples_.size()));
  }
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    const float s = samples_[k];
    if (!(s >= -1.0f && s <= 1.0f)) {
      throw Error(ErrorCode::invalid_argument,
                  "sample " + std::to_string(k) + " outside [-1, 1]");
    }
  }
}

SignalBuffer generate_sine_fragment(std::size_t cycles, std::size_t samples_per_cycle,
                                    double amplitude) {
  if (cycles < 1) throw Error(ErrorCode::invalid_argument, "cycles must be >= 1");
  if (samples_per_cycle < 4) {
    throw Error(ErrorCode::invalid_argument, "samples_per_cycle must be >= 4");
  }
  if (!(amplitude > 0.0 && amplitude <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "amplitude must lie in (0, 1]");
  }

  std::vector<float> one_cycle(samples_per_cycle);
  for (std::size_t k = 0; k < samples_per_cycle; ++k) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(samples_per_cycle);
    one_cycle[k] = static_cast<float>(amplitude * std::sin(phase));
  }
  // sin(pi) and friends are not exactly zero in floating point.
  if (samples_per_cycle % 2 == 0) one_cycle[samples_per_cycle / 2] = 0.0f;
  if (samples_per_cycle % 4 == 0) {
    one_cycle[samples_per_cycle / 4] = static_cast<float>(amplitude);
    one_cycle[3 * samples_per_cycle / 4] = static_cast<float>(-amplitude);
  }

  std::vector<float> samples;
  samples.reserve(cycles * samples_per_cycle);
  for (std::size_t c = 0; c < cycles; ++c) {
    samples.insert(samples.end(), one_cycle.begin(), one_cycle.end());
  }
  return SignalBuffer(std::move(samples));
}

SignalBuffer pilot_fragment() { return generate_sine_fragment(240, 100, 1.0); }

namespace {

inline double sample_or_zero(std::span<const float> s, std::ptrdiff_t k) noexcept {
  if (k < 0 || k >= static_cast<std::ptrdiff_t>(s.size())) return 0.0;
  return static_cast<double>(s[static_cast<std::size_t>(k)]);
}

}  // namespace

double read_cubic(const SignalBuffer& buffer, double index) noexcept {
  const double last = static_cast<double>(buffer.size() - 1);
  if (!(index >= 0.0 && index <= last)) return 0.0;

  const double base = std::floor(index);
  const double t = index - base;
  const auto k = static_cast<std::ptrdiff_t>(base);
  const auto s = buffer.samples();

  const double p1 = sample_or_zero(s, k);
  if (t == 0.0) return p1;
  const double p0 = sample_or_zero(s, k - 1);
  const double p2 = sample_or_zero(s, k + 1);
  const double p3 = sample_or_zero(s, k + 2);

  // Catmull-Rom in Horner form.
  const double c1 = 0.5 * (p2 - p0);
  const double c2 = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
  const double c3 = 0.5 * (p3 - p0) + 1.5 * (p1 - p2);
  return ((c3 * t + c2) * t + c1) * t + p1;
}

}  // namespace ksf
