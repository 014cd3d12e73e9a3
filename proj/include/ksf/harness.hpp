#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ksf/trace.hpp"

namespace ksf {

/// One row of the mapping characterization table. Computed quantities come
/// from first principles; `reference_*` hold the expected display strings and the
/// `*_shown` strings the computed values formatted at the same precision.
struct Table1Row {
  int mapping_id = 0;
  double samples_per_mm = 0.0;
  double cycle_width_mm = 0.0;
  double fragment_width_mm = 0.0;
  double min_frequency_hz = 0.0;
  double max_frequency_hz = 0.0;

  std::string reference_cycle_width;
  std::string reference_fragment_width;
  std::string reference_frequency_range;
  std::string cycle_width_shown;
  std::string fragment_width_shown;
  std::string frequency_range_shown;

  bool cycle_width_matches() const { return cycle_width_shown == reference_cycle_width; }
  bool fragment_width_matches() const {
    return fragment_width_shown == reference_fragment_width;
  }
  bool frequency_range_matches() const {
    return frequency_range_shown == reference_frequency_range;
  }
  bool matches() const {
    return cycle_width_matches() && fragment_width_matches() && frequency_range_matches();
  }
};

inline constexpr std::size_t kPilotCycles = 240;
inline constexpr std::size_t kPilotSamplesPerCycle = 100;

std::vector<Table1Row> table1_report();

struct RenderRequest {
  std::filesystem::path signal_path;
  std::filesystem::path trajectory_path;
  SpatialMapping mapping{};
  std::optional<int> preset_id;
  bool friction_enabled = true;
  EngineRate rate{192000};
  std::string out_prefix;
};

struct RenderOutput {
  explicit RenderOutput(EngineRate rate) : trace(rate) {}
  Trace trace;
  TraceFiles files;
};

/// In-memory core of render_offline.
Trace render_trace(std::shared_ptr<const SignalBuffer> signal,
                   const std::vector<DisplacementUpdate>& updates,
                   const PipelineConfig& config);

RenderOutput render_offline(const RenderRequest& request);

struct PilotMaterials {
  std::filesystem::path signal_wav;
  std::vector<std::filesystem::path> presets;
  std::vector<std::filesystem::path> conditions;
  std::filesystem::path demo_trajectory;
};

/// Writes the pilot fragment, the three mapping presets, the six
/// (mapping x friction on/off) condition configs and a demo trajectory.
PilotMaterials make_pilot_materials(const std::filesystem::path& out_dir);

}  // namespace ksf
