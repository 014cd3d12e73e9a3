#pragma once

#include <span>
#include <vector>

#include "ksf/signal.hpp"

namespace ksf {

/// Ties surface position to buffer index: index = (x - origin) * samples_per_mm.
struct SpatialMapping {
  double samples_per_mm = 1.0;
  double origin_mm = 0.0;

  /// Throws invalid_argument unless samples_per_mm is finite and > 0.
  static SpatialMapping make(double samples_per_mm, double origin_mm = 0.0);

  double fragment_width_mm(const SignalBuffer& buffer) const noexcept {
    return static_cast<double>(buffer.size()) / samples_per_mm;
  }
};

double position_to_index(double position_mm, const SpatialMapping& mapping) noexcept;

/// audio[j] = clamp(read_cubic(buffer, index(positions[j])), -1, 1).
std::vector<double> render_audio(std::span<const double> positions,
                                 const SpatialMapping& mapping,
                                 const SignalBuffer& buffer);
void render_audio_into(std::span<const double> positions, const SpatialMapping& mapping,
                       const SignalBuffer& buffer, std::span<double> out);

}  // namespace ksf
