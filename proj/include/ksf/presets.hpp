#pragma once

#include <span>

#include "ksf/sonify.hpp"

namespace ksf {

/// The three built-in spatial mappings.
struct MappingPreset {
  int id;
  double samples_per_mm;

  SpatialMapping mapping(double origin_mm = 0.0) const {
    return SpatialMapping::make(samples_per_mm, origin_mm);
  }
};

std::span<const MappingPreset> mapping_presets() noexcept;

/// Throws invalid_argument for ids other than 1, 2, 3.
const MappingPreset& mapping_preset(int id);

}  // namespace ksf
