#include "ksf/sonify.hpp"

#include <algorithm>
#include <cmath>

#include "ksf/error.hpp"
#include "ksf/presets.hpp"

namespace ksf {

SpatialMapping SpatialMapping::make(double samples_per_mm, double origin_mm) {
  if (!std::isfinite(samples_per_mm) || samples_per_mm <= 0.0) {
    throw Error(ErrorCode::invalid_argument, "samples_per_mm must be > 0");
  }
  if (!std::isfinite(origin_mm)) {
    throw Error(ErrorCode::invalid_argument, "origin_mm must be finite");
  }
  return SpatialMapping{samples_per_mm, origin_mm};
}

double position_to_index(double position_mm, const SpatialMapping& mapping) noexcept {
  return (position_mm - mapping.origin_mm) * mapping.samples_per_mm;
}

void render_audio_into(std::span<const double> positions, const SpatialMapping& mapping,
                       const SignalBuffer& buffer, std::span<double> out) {
  for (std::size_t j = 0; j < positions.size(); ++j) {
    const double value = read_cubic(buffer, position_to_index(positions[j], mapping));
    out[j] = std::clamp(value, -1.0, 1.0);
  }
}

std::vector<double> render_audio(std::span<const double> positions,
                                 const SpatialMapping& mapping,
                                 const SignalBuffer& buffer) {
  std::vector<double> out(positions.size());
  render_audio_into(positions, mapping, buffer, out);
  return out;
}

namespace {
constexpr MappingPreset kPresets[] = {{1, 4000.0}, {2, 500.0}, {3, 8.0}};
}

std::span<const MappingPreset> mapping_presets() noexcept { return kPresets; }

const MappingPreset& mapping_preset(int id) {
  for (const auto& p : kPresets) {
    if (p.id == id) return p;
  }
  throw Error(ErrorCode::invalid_argument,
              "unknown mapping preset " + std::to_string(id) + " (expected 1, 2 or 3)");
}

}  // namespace ksf
