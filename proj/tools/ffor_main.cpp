#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <flexregion/app.hpp>

namespace {

struct Flags {
  std::string config;
  std::string grid, fleet, measurements, weather, out;
  int t0 = -1;
  std::vector<int> durations;
  int duration_steps = -1;
  std::string date_start, date_end;
  std::vector<int> start_hours;
  std::vector<double> multipliers;
  double total_pv = -1.0;
  int n_poly = -1;
  double tol_rel_area = -1.0;
  double dt_hours = -1.0;
  double q_max = -1.0;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file; flags override its values");
  cmd->add_option("--grid", f.grid, "grid description (JSON)");
  cmd->add_option("--fleet", f.fleet, "device fleet (JSON)");
  cmd->add_option("--measurements", f.measurements, "per-node net load CSV (MW, consumption-positive)");
  cmd->add_option("--weather", f.weather, "weather CSV (temperature, irradiance)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--n-poly", f.n_poly, "polygon vertex count for apparent-power limits");
  cmd->add_option("--tol-rel-area", f.tol_rel_area, "relative area tolerance of the direction sweep");
  cmd->add_option("--dt-hours", f.dt_hours, "timestep length in hours");
  cmd->add_option("--q-max", f.q_max, "heat pump heating rate at full power, degC per hour");
}

flexregion::app::ScenarioConfig merge(const Flags& f, const std::string& analysis) {
  flexregion::app::ScenarioConfig cfg;
  if (!f.config.empty()) cfg = flexregion::app::load_config_file(f.config);
  cfg.analysis = analysis;
  if (!f.grid.empty()) cfg.grid_path = f.grid;
  if (!f.fleet.empty()) cfg.fleet_path = f.fleet;
  if (!f.measurements.empty()) cfg.measurements_path = f.measurements;
  if (!f.weather.empty()) cfg.weather_path = f.weather;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.t0 >= 0) cfg.t0 = f.t0;
  if (!f.durations.empty()) cfg.durations = f.durations;
  if (f.duration_steps >= 0) cfg.duration_steps = f.duration_steps;
  if (!f.date_start.empty()) cfg.date_start = f.date_start;
  if (!f.date_end.empty()) cfg.date_end = f.date_end;
  if (!f.start_hours.empty()) cfg.start_hours = f.start_hours;
  if (!f.multipliers.empty()) cfg.multipliers = f.multipliers;
  if (f.total_pv >= 0.0) cfg.total_pv_capacity_mw = f.total_pv;
  if (f.n_poly > 0) cfg.n_poly = f.n_poly;
  if (f.tol_rel_area > 0.0) cfg.tol_rel_area = f.tol_rel_area;
  if (f.dt_hours > 0.0) cfg.dt_hours = f.dt_hours;
  if (f.q_max > 0.0) cfg.heating.q_max = f.q_max;
  return cfg;
}

int run(const flexregion::app::ScenarioConfig& cfg) {
  const flexregion::app::RunResult res = flexregion::app::run_analysis(cfg);
  for (const std::string& note : res.notes)
    std::fprintf(stderr, "%s\n", note.c_str());
  for (const std::string& file : res.files)
    std::printf("wrote %s\n", file.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli("aggregated flexibility regions at the point of common coupling");
  cli.require_subcommand(1);
  Flags f;

  CLI::App* single = cli.add_subcommand(
      "single", "flexibility polytope for one timestep");
  add_common(single, f);
  single->add_option("--t0", f.t0, "timestep index into the weather series");

  CLI::App* durations = cli.add_subcommand(
      "durations", "nested polytopes for sustained durations");
  add_common(durations, f);
  durations->add_option("--t0", f.t0, "window start index");
  durations->add_option("--durations", f.durations, "sustained durations, in steps");

  CLI::App* seasonal = cli.add_subcommand(
      "seasonal", "directed flexibility per day over a date range");
  add_common(seasonal, f);
  seasonal->add_option("--duration-steps", f.duration_steps, "window length in steps");
  seasonal->add_option("--date-start", f.date_start, "first day, YYYY-MM-DD");
  seasonal->add_option("--date-end", f.date_end, "last day, YYYY-MM-DD");
  seasonal->add_option("--start-hours", f.start_hours, "window start hours, 0..23");

  CLI::App* penetration = cli.add_subcommand(
      "penetration", "directed flexibility vs heat pump capacity multiplier");
  add_common(penetration, f);
  penetration->add_option("--t0", f.t0, "window start index");
  penetration->add_option("--duration-steps", f.duration_steps, "window length in steps");
  penetration->add_option("--multipliers", f.multipliers, "heat pump capacity multipliers, >= 0");

  CLI::App* identify = cli.add_subcommand(
      "identify", "estimate per-node PV and heat pump capacity from measurements");
  add_common(identify, f);
  identify->add_option("--total-pv-capacity-mw", f.total_pv,
                       "known grid-total PV capacity to distribute");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return 1;
  }

  try {
    if (single->parsed()) return run(merge(f, "single"));
    if (durations->parsed()) return run(merge(f, "durations"));
    if (seasonal->parsed()) return run(merge(f, "seasonal"));
    if (penetration->parsed()) return run(merge(f, "penetration"));
    return run(merge(f, "identify"));
  } catch (const flexregion::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const flexregion::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
}
