#include "ksf/device_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string>

#include "ksf/error.hpp"

namespace ksf {

namespace {

// 1 N on 1 kg is 1 m/s^2 = 1000 mm/s^2.
constexpr double kMmPerM = 1000.0;

double sign_of(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

void SimConfig::validate() const {
  if (!(mass_kg > 0.0)) throw Error(ErrorCode::invalid_argument, "mass_kg must be > 0");
  if (!(step_s > 0.0)) throw Error(ErrorCode::invalid_argument, "step_s must be > 0");
  if (!stiction_equals_kinetic && !(static_ratio > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "static_ratio must be > 0");
  }
  const double ratio = kUpdateIntervalS / step_s;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw Error(ErrorCode::invalid_argument, "step_s must divide the 8 ms update interval");
  }
}

std::size_t SimConfig::steps_per_update() const {
  validate();
  return static_cast<std::size_t>(std::llround(kUpdateIntervalS / step_s));
}

PuckState step(const PuckState& state, double applied_N, double friction_N,
               const SimConfig& config) {
  if (!(friction_N >= kDeviceMinForceN && friction_N <= kDeviceMaxForceN)) {
    throw Error(ErrorCode::invalid_argument,
                "friction command " + std::to_string(friction_N) +
                    " N outside the device range [0.14, 1.4]");
  }
  const double dt = config.step_s;
  PuckState next = state;
  next.time_s = state.time_s + dt;

  const double v = state.velocity_mm_s;
  double direction = sign_of(v);
  if (v == 0.0) {
    const double breakaway =
        config.stiction_equals_kinetic ? friction_N : friction_N * config.static_ratio;
    if (std::abs(applied_N) <= breakaway) return next;
    direction = sign_of(applied_N);
  }

  const double accel = (applied_N - direction * friction_N) / config.mass_kg * kMmPerM;
  const double v_new = v + accel * dt;
  if (v_new * direction < 0.0) {
    // Friction alone cannot reverse motion: stop at the crossing.
    const double t_cross = v == 0.0 ? 0.0 : -v / accel;
    next.position_mm = state.position_mm + 0.5 * v * t_cross;
    next.velocity_mm_s = 0.0;
    return next;
  }
  next.velocity_mm_s = v_new;
  next.position_mm = state.position_mm + v_new * dt;
  return next;
}

ForceProfile::ForceProfile(std::vector<Point> points) : points_(std::move(points)) {
  if (points_.empty()) throw Error(ErrorCode::invalid_argument, "force profile is empty");
  if (points_.front().t_s != 0.0) {
    throw Error(ErrorCode::invalid_argument, "force profile must start at t = 0");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].force_N) || !std::isfinite(points_[i].t_s)) {
      throw Error(ErrorCode::invalid_argument, "force profile values must be finite");
    }
    if (i > 0 && !(points_[i].t_s > points_[i - 1].t_s)) {
      throw Error(ErrorCode::invalid_argument, "force profile times must increase");
    }
  }
}

ForceProfile ForceProfile::constant(double force_N) {
  return ForceProfile({{0.0, force_N}});
}

double ForceProfile::at(double t_s) const noexcept {
  const auto it = std::upper_bound(points_.begin(), points_.end(), t_s,
                                   [](double t, const Point& p) { return t < p.t_s; });
  if (it == points_.begin()) return points_.front().force_N;
  return std::prev(it)->force_N;
}

ForceProfile parse_force_profile_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::malformed_input, "empty profile", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_s,F_app_N") {
    throw Error(ErrorCode::malformed_input, "line 1: expected header t_s,F_app_N", 1);
  }
  std::vector<ForceProfile::Point> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double v[2] = {0.0, 0.0};
    bool ok = comma != std::string::npos && line.find(',', comma + 1) == std::string::npos;
    for (int i = 0; ok && i < 2; ++i) {
      const char* b = line.data() + (i == 0 ? 0 : comma + 1);
      const char* e = line.data() + (i == 0 ? comma : line.size());
      const auto [ptr, ec] = std::from_chars(b, e, v[i]);
      ok = b != e && ec == std::errc{} && ptr == e;
    }
    if (!ok) {
      throw Error(ErrorCode::malformed_input,
                  "line " + std::to_string(line_no) + ": expected t_s,F_app_N numbers",
                  line_no);
    }
    points.push_back({v[0], v[1]});
  }
  try {
    return ForceProfile(std::move(points));
  } catch (const Error& e) {
    throw Error(ErrorCode::malformed_input, e.what(), line_no);
  }
}

ForceProfile read_force_profile_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::file_not_found, "cannot open " + path.string());
  return parse_force_profile_csv(in);
}

ClosedLoopResult run_closed_loop(const ForceProfile& profile,
                                 std::shared_ptr<const SignalBuffer> signal,
                                 const SpatialMapping& mapping, const SimConfig& sim,
                                 const ClosedLoopOptions& options) {
  if (!(options.duration_s > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "duration must be > 0");
  }
  const std::size_t steps = sim.steps_per_update();
  const auto frames =
      static_cast<std::size_t>(std::ceil(options.duration_s / kUpdateIntervalS - 1e-9));

  PipelineConfig config;
  config.rate = options.rate;
  config.mapping = mapping;
  config.friction_enabled = options.friction_enabled;
  config.force_mapping = options.force_mapping;
  config.friction_off_N = options.friction_off_N;
  RenderPipeline pipeline(signal, config);

  ClosedLoopResult result(options.rate);
  Trace& trace = result.trace;
  trace.meta.samples_per_mm = mapping.samples_per_mm;
  trace.meta.origin_mm = mapping.origin_mm;
  trace.meta.signal_length = signal->size();
  trace.meta.friction_enabled = options.friction_enabled;
  trace.puck.reserve(frames * steps);

  const double fragment_start = mapping.origin_mm;
  const double fragment_end = mapping.origin_mm + mapping.fragment_width_mm(*signal);

  PuckState puck;
  double command = pipeline.last_friction_N();
  std::int64_t reported_counts = 0;
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t step_index = f * steps + s;
      const double t = static_cast<double>(step_index) * sim.step_s;
      const double applied = profile.at(t);
      puck = step(puck, applied, command, sim);
      puck.time_s = static_cast<double>(step_index + 1) * sim.step_s;
      trace.puck.push_back(
          {puck.time_s, puck.position_mm, puck.velocity_mm_s, applied, command});
    }

    // Reporting absolute counts carries the sub-count residual implicitly.
    const std::int64_t counts = quantize_displacement(puck.position_mm);
    const DisplacementUpdate update{counts - reported_counts, 0};
    reported_counts = counts;

    const StepResult& out = pipeline.step(update);
    trace.append(update, out);
    result.updates.push_back(update);
    command = out.final_friction_N;

    const double t_frame = static_cast<double>(f + 1) * kUpdateIntervalS;
    if (!result.fragment_enter_s && out.motion.position_mm >= fragment_start) {
      result.fragment_enter_s = t_frame;
    }
    if (!result.fragment_exit_s && out.motion.position_mm >= fragment_end) {
      result.fragment_exit_s = t_frame;
    }
  }
  result.final_state = puck;
  return result;
}

}  // namespace ksf
