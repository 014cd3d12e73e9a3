#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ksf {

/// A 1D spatial amplitude series. Samples are stored as float32, the same
/// precision as the WAV and raw files they are loaded from, so an in-memory
/// fragment and its on-disk copy read back identically.
///
/// Every sample lies in [-1, +1] and there are at least four of them; the
/// constructor rejects anything else instead of clamping.
class SignalBuffer {
 public:
  static constexpr std::size_t kMinLength = 4;

  explicit SignalBuffer(std::vector<float> samples);

  std::size_t size() const noexcept { return samples_.size(); }
  std::span<const float> samples() const noexcept { return samples_; }
  float operator[](std::size_t k) const noexcept { return samples_[k]; }

  friend bool operator==(const SignalBuffer&, const SignalBuffer&) = default;

 private:
  std::vector<float> samples_;
};

/// sample[k] = amplitude * sin(2*pi*k / samples_per_cycle). The phase is
/// reduced modulo one cycle before evaluation so that repeated cycles are
/// bit-identical.
SignalBuffer generate_sine_fragment(std::size_t cycles,
                                    std::size_t samples_per_cycle,
                                    double amplitude);

/// 240 full-scale cycles of 100 samples each.
SignalBuffer pilot_fragment();

/// Uniform Catmull-Rom readout. Neighbours outside the buffer read as zero;
/// indices outside [0, size-1] return exactly 0.0. No clamping is applied,
/// so values may overshoot +-1 between knots.
double read_cubic(const SignalBuffer& buffer, double index) noexcept;

}  // namespace ksf
