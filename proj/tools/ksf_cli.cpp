// ksf: offline rendering, pilot materials, closed-loop simulation and the
// live session server.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ksf/audio_io.hpp"
#include "ksf/device_sim.hpp"
#include "ksf/error.hpp"
#include "ksf/harness.hpp"
#include "ksf/presets.hpp"
#include "ksf/service/server.hpp"

namespace {

using nlohmann::ordered_json;

struct MappingArgs {
  std::optional<int> preset;
  std::optional<double> samples_per_mm;
  double origin_mm = 0.0;
  std::string friction = "on";
  std::string config_path;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--mapping", preset, "Mapping preset 1, 2 or 3");
    cmd->add_option("--samples-per-mm", samples_per_mm, "Custom spatial density");
    cmd->add_option("--origin", origin_mm, "Surface position of buffer index 0 (mm)");
    cmd->add_option("--friction", friction, "on | off")->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--config", config_path, "Condition file written by `ksf pilot`");
  }

  bool friction_enabled() const { return friction == "on"; }

  ksf::SpatialMapping resolve() const {
    if (samples_per_mm) return ksf::SpatialMapping::make(*samples_per_mm, origin_mm);
    return ksf::mapping_preset(preset.value_or(2)).mapping(origin_mm);
  }
};

void print_table1(bool as_json) {
  const auto rows = ksf::table1_report();
  if (as_json) {
    ordered_json out = ordered_json::array();
    for (const auto& r : rows) {
      out.push_back({{"mapping", r.mapping_id},
                     {"samples_per_mm", r.samples_per_mm},
                     {"cycle_width_mm", r.cycle_width_mm},
                     {"fragment_width_mm", r.fragment_width_mm},
                     {"min_frequency_hz", r.min_frequency_hz},
                     {"max_frequency_hz", r.max_frequency_hz},
                     {"cycle_width", r.cycle_width_shown},
                     {"fragment_width", r.fragment_width_shown},
                     {"frequency_range", r.frequency_range_shown},
                     {"reference",
                      {{"cycle_width", r.reference_cycle_width},
                       {"fragment_width", r.reference_fragment_width},
                       {"frequency_range", r.reference_frequency_range}}},
                     {"matches", r.matches()}});
    }
    std::cout << out.dump(2) << '\n';
    return;
  }
  std::printf("%-8s %14s %12s %14s %22s  %s\n", "mapping", "samples/mm", "cycle", "fragment",
              "frequency range", "check");
  for (const auto& r : rows) {
    std::printf("%-8d %14g %12s %14s %22s  %s\n", r.mapping_id, r.samples_per_mm,
                r.cycle_width_shown.c_str(), r.fragment_width_shown.c_str(),
                r.frequency_range_shown.c_str(), r.matches() ? "ok" : "MISMATCH");
  }
}

std::filesystem::path resolve_relative(const std::filesystem::path& base,
                                       const std::string& value) {
  const std::filesystem::path p(value);
  return p.is_absolute() ? p : base.parent_path() / p;
}

int run(int argc, char** argv) {
  CLI::App app{"Kinetic surface friction rendering for interactive sonification"};
  app.require_subcommand(1);
  app.fallthrough();

  int rate_hz = 192000;
  std::string out;
  app.add_option("--rate", rate_hz, "Engine sample rate in Hz (multiple of 125)");
  app.add_option("--out", out, "Output prefix (render/simulate) or directory (pilot)");

  auto* table1 = app.add_subcommand("table1", "Recompute the mapping characterization table");
  bool table1_json = false;
  table1->add_flag("--json", table1_json, "Emit JSON");

  auto* pilot = app.add_subcommand("pilot", "Write pilot signal, presets and conditions");

  auto* render = app.add_subcommand("render", "Render a trajectory to audio/friction/trace");
  std::string signal_path, trajectory_path;
  MappingArgs render_map;
  render->add_option("--signal", signal_path, "float32 WAV or raw f32 signal");
  render->add_option("--trajectory", trajectory_path, "update_index,dx_counts,dy_counts CSV")
      ->required();
  render_map.add_to(render);

  auto* simulate = app.add_subcommand("simulate", "Closed-loop puck simulation");
  std::string profile_path, sim_signal;
  std::optional<double> constant_force;
  double duration = 0.0;
  ksf::SimConfig sim;
  MappingArgs sim_map;
  simulate->add_option("--profile", profile_path, "t_s,F_app_N CSV");
  simulate->add_option("--force", constant_force, "Constant applied force (N)");
  simulate->add_option("--duration", duration, "Seconds (default: profile end or 1 s)");
  simulate->add_option("--signal", sim_signal, "Signal file (default: pilot fragment)");
  simulate->add_option("--mass", sim.mass_kg, "Puck mass (kg)");
  simulate->add_option("--step", sim.step_s, "Integration step (s)");
  simulate->add_option("--static-ratio", sim.static_ratio,
                       "Breakaway/kinetic ratio (enables separate stiction)");
  sim_map.add_to(simulate);

  auto* serve = app.add_subcommand("serve", "Start the live session server");
  ksf::service::ServerOptions server_opts = ksf::service::options_from_env();
  serve->add_option("--port", server_opts.port, "TCP port (env KSF_PORT)");
  serve->add_option("--host", server_opts.bind_address, "Bind address (env KSF_BIND)");
  serve->add_option("--threads", server_opts.threads, "I/O threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const ksf::EngineRate rate(rate_hz);

  if (*table1) {
    print_table1(table1_json);
    bool all = true;
    for (const auto& r : ksf::table1_report()) all = all && r.matches();
    return all ? 0 : 3;
  }

  if (*pilot) {
    const auto materials = ksf::make_pilot_materials(out.empty() ? "pilot" : out);
    std::cout << "signal: " << materials.signal_wav.string() << '\n';
    for (const auto& c : materials.conditions) std::cout << "condition: " << c.string() << '\n';
    std::cout << "trajectory: " << materials.demo_trajectory.string() << '\n';
    return 0;
  }

  if (*render) {
    if (out.empty()) throw ksf::Error(ksf::ErrorCode::invalid_argument, "render needs --out");
    ksf::RenderRequest req;
    req.rate = rate;
    if (!render_map.config_path.empty()) {
      const auto cfg = nlohmann::json::parse(std::ifstream(render_map.config_path), nullptr,
                                             false);
      if (cfg.is_discarded()) {
        throw ksf::Error(ksf::ErrorCode::malformed_input,
                         "cannot parse " + render_map.config_path);
      }
      render_map.preset = cfg.value("mapping", 2);
      if (cfg.contains("samples_per_mm")) {
        render_map.samples_per_mm = cfg["samples_per_mm"].get<double>();
      }
      render_map.origin_mm = cfg.value("origin_mm", 0.0);
      render_map.friction = cfg.value("friction_enabled", true) ? "on" : "off";
      if (signal_path.empty()) {
        signal_path =
            resolve_relative(render_map.config_path, cfg.value("signal", "")).string();
      }
    }
    if (signal_path.empty()) {
      throw ksf::Error(ksf::ErrorCode::invalid_argument, "render needs --signal or --config");
    }
    req.signal_path = signal_path;
    req.trajectory_path = trajectory_path;
    req.mapping = render_map.resolve();
    req.preset_id = render_map.preset;
    if (!req.preset_id && !render_map.samples_per_mm) req.preset_id = 2;
    req.friction_enabled = render_map.friction_enabled();
    req.out_prefix = out;
    const auto result = ksf::render_offline(req);
    std::cout << "wrote " << result.files.audio_wav.string() << ", "
              << result.files.friction_f32.string() << ", " << result.files.trace_csv.string()
              << ", " << result.files.meta_json.string() << '\n';
    return 0;
  }

  if (*simulate) {
    if (out.empty()) throw ksf::Error(ksf::ErrorCode::invalid_argument, "simulate needs --out");
    if (profile_path.empty() == !constant_force.has_value()) {
      throw ksf::Error(ksf::ErrorCode::invalid_argument,
                       "simulate needs exactly one of --profile or --force");
    }
    const ksf::ForceProfile profile = constant_force
                                          ? ksf::ForceProfile::constant(*constant_force)
                                          : ksf::read_force_profile_csv(profile_path);
    if (!sim.stiction_equals_kinetic || sim.static_ratio != 1.0) {
      sim.stiction_equals_kinetic = false;
    }
    auto signal = std::make_shared<const ksf::SignalBuffer>(
        sim_signal.empty() ? ksf::pilot_fragment() : ksf::load_signal(sim_signal));

    ksf::ClosedLoopOptions opts;
    opts.rate = rate;
    opts.friction_enabled = sim_map.friction_enabled();
    opts.duration_s = duration > 0.0 ? duration
                                     : (profile.last_time() > 0.0 ? profile.last_time() : 1.0);
    const auto mapping = sim_map.resolve();
    auto result = ksf::run_closed_loop(profile, signal, mapping, sim, opts);
    result.trace.meta.signal_descriptor =
        sim_signal.empty() ? "pilot" : std::filesystem::path(sim_signal).filename().string();
    if (!sim_map.samples_per_mm) result.trace.meta.preset_id = sim_map.preset.value_or(2);

    auto opt_json = [](const std::optional<double>& v) {
      return v ? ordered_json(*v) : ordered_json(nullptr);
    };
    const ordered_json extra = {
        {"simulation",
         {{"mass_kg", sim.mass_kg},
          {"step_s", sim.step_s},
          {"stiction_equals_kinetic", sim.stiction_equals_kinetic},
          {"static_ratio", sim.static_ratio},
          {"duration_s", opts.duration_s},
          {"fragment_enter_s", opt_json(result.fragment_enter_s)},
          {"fragment_exit_s", opt_json(result.fragment_exit_s)},
          {"traversal_time_s", opt_json(result.traversal_time_s())}}},
        {"trajectory", std::filesystem::path(out + ".trajectory.csv").filename().string()}};
    const auto files = ksf::write_trace_files(result.trace, out, extra.dump());
    ksf::write_trajectory_csv(out + ".trajectory.csv", result.updates);
    std::cout << "wrote " << files.meta_json.string();
    if (const auto t = result.traversal_time_s()) std::cout << " (traversal " << *t << " s)";
    std::cout << '\n';
    return 0;
  }

  if (*serve) {
    ksf::service::Server server(server_opts);
    const auto port = server.start();
    std::cout << "listening on " << server_opts.bind_address << ':' << port << std::endl;
    server.wait();
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ksf::Error& e) {
    ordered_json err = {{"error", ksf::to_string(e.code())}, {"message", e.what()}};
    if (e.line() != 0) err["line"] = e.line();
    std::cerr << err.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << ordered_json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
}
