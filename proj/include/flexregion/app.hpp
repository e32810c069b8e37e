#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "baseline.hpp"
#include "ffor.hpp"
#include "identification.hpp"
#include "parallel.hpp"
#include "svg.hpp"

namespace flexregion::app {

// One scenario = one analysis run. Paths in a config file are resolved
// relative to the file's directory; CLI flags override file values.
struct ScenarioConfig {
  std::string grid_path;
  std::string fleet_path;
  std::string measurements_path;  // optional, empty means no metered load
  std::string weather_path;
  std::string out_dir = "out";
  std::string analysis = "single";

  int t0 = 0;
  std::vector<int> durations;  // steps, durations mode
  int duration_steps = 0;      // seasonal/penetration window; 0 picks the mode default
  std::string date_start;
  std::string date_end;
  std::vector<int> start_hours = {0, 12};
  std::vector<double> multipliers;
  double total_pv_capacity_mw = -1.0;  // identify mode, required there

  int n_poly = 12;
  double tol_rel_area = 1e-3;
  double dt_hours = 0.25;
  HeatingDemandModel heating;
};

struct RunResult {
  std::vector<std::string> files;  // paths written, in write order
  std::vector<std::string> notes;  // skipped windows and similar
};

namespace detail {

inline std::string resolve_path(const std::filesystem::path& base,
                                const std::string& p) {
  if (p.empty()) return p;
  std::filesystem::path fp(p);
  if (fp.is_absolute() || base.empty()) return fp.lexically_normal().string();
  return (base / fp).lexically_normal().string();
}

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  std::string s = buf;
  if (s == "-0") s = "0";
  return s;
}

inline void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw InputError("no " + what + " file configured");
  if (!std::filesystem::exists(path))
    throw InputError(what + " file not found: " + path);
}

inline std::string write_file(const std::filesystem::path& dir,
                              const std::string& name,
                              const std::string& content) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file: " + path.string());
  out << content;
  if (!out) throw InputError("cannot write output file: " + path.string());
  return path.string();
}

// Emitted polytopes are re-checked against their invariants: the origin
// (the baseline) must be a member and the hull must be convex CCW.
inline std::string polytope_document(const Polytope& poly) {
  PolygonRegion region{poly.vertices};
  if (distance_outside(region, Vec2{0.0, 0.0}) > 1e-7)
    throw SolverError("polytope lost the origin before serialization");
  if (poly.vertices.size() >= 3 && !is_convex_ccw(poly.vertices))
    throw SolverError("polytope is not convex CCW at serialization");
  return polytope_to_json(poly).dump(2) + "\n";
}

struct Inputs {
  Network net;
  std::vector<Device> fleet;
  WeatherSeries weather;
  MeasurementSeries measured;
};

inline Inputs load_inputs(const ScenarioConfig& cfg, bool need_grid,
                          bool need_fleet) {
  Inputs in;
  require_file(cfg.weather_path, "weather");
  in.weather = load_weather_csv(cfg.weather_path);
  if (need_grid) {
    require_file(cfg.grid_path, "grid");
    in.net = load_network_file(cfg.grid_path);
  }
  if (need_fleet) {
    require_file(cfg.fleet_path, "fleet");
    in.fleet = load_fleet_file(cfg.fleet_path,
                               need_grid ? in.net.base_mva() : 1.0);
  }
  if (!cfg.measurements_path.empty()) {
    require_file(cfg.measurements_path, "measurements");
    in.measured = load_measurement_csv(cfg.measurements_path, in.weather);
  } else {
    in.measured.weather = in.weather;
  }
  return in;
}

inline WeatherSeries slice_weather(const WeatherSeries& w, int at, int d) {
  WeatherSeries out;
  out.t.assign(w.t.begin() + at, w.t.begin() + at + d);
  out.temp_c.assign(w.temp_c.begin() + at, w.temp_c.begin() + at + d);
  out.irr_wm2.assign(w.irr_wm2.begin() + at, w.irr_wm2.begin() + at + d);
  return out;
}

inline MeasurementSeries slice_measurements(const MeasurementSeries& m, int at,
                                            int d) {
  MeasurementSeries out;
  out.weather = slice_weather(m.weather, at, d);
  for (const auto& [node, series] : m.node_p_mw)
    out.node_p_mw[node] = std::vector<double>(series.begin() + at,
                                              series.begin() + at + d);
  return out;
}

inline std::string duration_label(int steps, double dt) {
  return "d=" + svg::fmt(steps * dt) + " h";
}

inline void check_window(const ScenarioConfig& cfg, int horizon, int d) {
  if (cfg.t0 < 0 || cfg.t0 >= horizon)
    throw InputError("t0 outside the weather series");
  if (d < 1) throw InputError("duration must be at least one step");
  if (cfg.t0 + d > horizon)
    throw InputError("duration " + std::to_string(d) +
                     " steps exceeds the horizon from t0");
}

}  // namespace detail

inline ScenarioConfig config_from_json(const nlohmann::json& doc,
                                       const std::filesystem::path& base_dir = {}) {
  ScenarioConfig cfg;
  if (!doc.is_object()) throw InputError("config: document must be an object");
  try {
    for (const auto& [key, val] : doc.items()) {
      if (key == "grid") cfg.grid_path = detail::resolve_path(base_dir, val.get<std::string>());
      else if (key == "fleet") cfg.fleet_path = detail::resolve_path(base_dir, val.get<std::string>());
      else if (key == "measurements") cfg.measurements_path = detail::resolve_path(base_dir, val.get<std::string>());
      else if (key == "weather") cfg.weather_path = detail::resolve_path(base_dir, val.get<std::string>());
      else if (key == "out") cfg.out_dir = detail::resolve_path(base_dir, val.get<std::string>());
      else if (key == "analysis") cfg.analysis = val.get<std::string>();
      else if (key == "t0") cfg.t0 = val.get<int>();
      else if (key == "durations") cfg.durations = val.get<std::vector<int>>();
      else if (key == "duration_steps") cfg.duration_steps = val.get<int>();
      else if (key == "date_start") cfg.date_start = val.get<std::string>();
      else if (key == "date_end") cfg.date_end = val.get<std::string>();
      else if (key == "start_hours") cfg.start_hours = val.get<std::vector<int>>();
      else if (key == "multipliers") cfg.multipliers = val.get<std::vector<double>>();
      else if (key == "total_pv_capacity_mw") cfg.total_pv_capacity_mw = val.get<double>();
      else if (key == "n_poly") cfg.n_poly = val.get<int>();
      else if (key == "tol_rel_area") cfg.tol_rel_area = val.get<double>();
      else if (key == "dt_hours") cfg.dt_hours = val.get<double>();
      else if (key == "heating") {
        for (const auto& [hk, hv] : val.items()) {
          if (hk == "t_zero_c") cfg.heating.t_zero = hv.get<double>();
          else if (hk == "t_full_c") cfg.heating.t_full = hv.get<double>();
          else if (hk == "q_max_c_per_h") cfg.heating.q_max = hv.get<double>();
          else throw InputError("config: unknown heating key '" + hk + "'");
        }
      } else {
        throw InputError("config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return cfg;
}

inline ScenarioConfig load_config_file(const std::string& path) {
  detail::require_file(path, "config");
  std::ifstream in(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + path + ": " + e.what());
  }
  return config_from_json(doc, std::filesystem::path(path).parent_path());
}

// Per-bus baseline decomposition, injection convention, MW. net_inj_mw is
// the modeled net injection; metered buses reconcile as measured = -net.
inline std::string baseline_audit_csv(const ScenarioFrame& f,
                                      const WeatherSeries& weather) {
  if (weather.size() < f.horizon)
    throw InputError("baseline audit: weather shorter than the frame horizon");
  const double base = f.net.base_mva();
  std::ostringstream out;
  out << "timestamp,node,pv_inj_mw,hp_inj_mw,residual_inj_mw,net_inj_mw\n";
  for (int i = 0; i < f.net.n_buses(); ++i) {
    const Bus& bus = f.net.buses()[static_cast<std::size_t>(i)];
    for (int t = 0; t < f.horizon; ++t) {
      double pv = 0.0, hp = 0.0;
      for (std::size_t j = 0; j < f.fleet.size(); ++j) {
        if (f.net.bus_index(device_bus(f.fleet[j])) != i) continue;
        const double p = f.device_baseline[j].p[static_cast<std::size_t>(t)];
        if (std::holds_alternative<PvDevice>(f.fleet[j])) pv += p;
        else hp += p;
      }
      const double res =
          f.nonflex[static_cast<std::size_t>(i)].p[static_cast<std::size_t>(t)];
      out << format_timestamp(weather.t[static_cast<std::size_t>(t)]) << ','
          << bus.id << ',' << detail::num(pv * base) << ','
          << detail::num(hp * base) << ',' << detail::num(res * base) << ','
          << detail::num((pv + hp + res) * base) << '\n';
    }
  }
  return out.str();
}

inline RunResult run_single(const ScenarioConfig& cfg) {
  const auto in = detail::load_inputs(cfg, true, true);
  const int horizon = in.weather.size();
  detail::check_window(cfg, horizon, 1);
  const ScenarioFrame frame =
      build_frame(in.net, in.fleet, in.weather, in.measured, cfg.dt_hours,
                  horizon, cfg.heating, cfg.n_poly);
  SweepOptions opt;
  opt.tol_rel_area = cfg.tol_rel_area;
  const Polytope poly = sweep(frame, cfg.t0, opt);

  RunResult res;
  const std::filesystem::path out(cfg.out_dir);
  res.files.push_back(
      detail::write_file(out, "polytope_single.json", detail::polytope_document(poly)));
  const std::string label =
      "t=" + format_timestamp(in.weather.t[static_cast<std::size_t>(cfg.t0)]);
  res.files.push_back(detail::write_file(
      out, "ffor_single.svg",
      svg::polytope_overlay_svg({{label, poly}}, "Flexibility region at the PCC")));
  res.files.push_back(detail::write_file(out, "baseline_audit.csv",
                                         baseline_audit_csv(frame, in.weather)));
  return res;
}

inline RunResult run_durations(const ScenarioConfig& cfg) {
  if (cfg.durations.empty())
    throw InputError("durations mode needs a nonempty duration list");
  const auto in = detail::load_inputs(cfg, true, true);
  const int horizon = in.weather.size();
  std::vector<int> durations = cfg.durations;
  std::sort(durations.begin(), durations.end());
  durations.erase(std::unique(durations.begin(), durations.end()),
                  durations.end());
  for (int d : durations) detail::check_window(cfg, horizon, d);

  const ScenarioFrame frame =
      build_frame(in.net, in.fleet, in.weather, in.measured, cfg.dt_hours,
                  horizon, cfg.heating, cfg.n_poly);
  SweepOptions opt;
  opt.tol_rel_area = cfg.tol_rel_area;

  RunResult res;
  const std::filesystem::path out(cfg.out_dir);
  std::vector<std::pair<std::string, Polytope>> overlay;
  std::ostringstream table;
  table << "duration_steps,duration_hours,dp_max_pu,dp_min_pu,max_abs_dp_pu\n";
  for (int d : durations) {
    const Polytope poly = sweep_multi(frame, cfg.t0, d, opt);
    double dp_max = 0.0, dp_min = 0.0;
    for (const Vec2& v : poly.vertices) {
      dp_max = std::max(dp_max, v.x);
      dp_min = std::min(dp_min, v.x);
    }
    table << d << ',' << detail::num(d * cfg.dt_hours) << ','
          << detail::num(dp_max) << ',' << detail::num(dp_min) << ','
          << detail::num(std::max(dp_max, -dp_min)) << '\n';
    res.files.push_back(detail::write_file(out,
                                           "polytope_d" + std::to_string(d) + ".json",
                                           detail::polytope_document(poly)));
    overlay.emplace_back(detail::duration_label(d, cfg.dt_hours), poly);
  }
  res.files.push_back(detail::write_file(out, "durations.csv", table.str()));
  res.files.push_back(detail::write_file(
      out, "durations.svg",
      svg::polytope_overlay_svg(overlay, "Flexibility by sustained duration")));
  return res;
}

inline RunResult run_seasonal(const ScenarioConfig& cfg) {
  if (cfg.date_start.empty() || cfg.date_end.empty())
    throw InputError("seasonal mode needs date_start and date_end");
  for (int h : cfg.start_hours)
    if (h < 0 || h > 23) throw InputError("start hours must be within 0..23");
  if (cfg.start_hours.empty())
    throw InputError("seasonal mode needs at least one start hour");
  const int d = cfg.duration_steps > 0 ? cfg.duration_steps : 16;
  const auto in = detail::load_inputs(cfg, true, true);
  const int horizon = in.weather.size();
  if (d < 1) throw InputError("duration must be at least one step");

  std::vector<int> hours = cfg.start_hours;
  std::sort(hours.begin(), hours.end());
  hours.erase(std::unique(hours.begin(), hours.end()), hours.end());

  const Timestamp first_day = parse_timestamp(cfg.date_start + "T00:00");
  const Timestamp last_day = parse_timestamp(cfg.date_end + "T00:00");

  struct Record {
    std::string date;
    int hour = 0;
    double day_offset = 0.0;
    int index = -1;  // start offset in the weather grid, -1 when absent
    bool ok = false;
    double dp_max = 0.0, dp_min = 0.0;
    std::string skip_reason;
  };
  std::vector<Record> records;
  for (std::int64_t m = first_day.minutes; m <= last_day.minutes; m += 24 * 60) {
    for (int h : hours) {
      Record r;
      r.date = timestamp_date(Timestamp{m});
      r.hour = h;
      r.day_offset = static_cast<double>(m - first_day.minutes) / (24.0 * 60.0) +
                     h / 24.0;
      const Timestamp start{m + static_cast<std::int64_t>(h) * 60};
      const auto it = std::lower_bound(in.weather.t.begin(), in.weather.t.end(), start);
      if (it == in.weather.t.end() || !(*it == start)) {
        r.skip_reason = "start time not on the weather grid";
      } else {
        const int idx = static_cast<int>(it - in.weather.t.begin());
        if (idx + d > horizon)
          r.skip_reason = "window extends past the weather series";
        else
          r.index = idx;
      }
      records.push_back(std::move(r));
    }
  }

  parallel_for(static_cast<int>(records.size()), [&](int k) {
    Record& r = records[static_cast<std::size_t>(k)];
    if (r.index < 0) return;
    try {
      const WeatherSeries w = detail::slice_weather(in.weather, r.index, d);
      const MeasurementSeries m =
          detail::slice_measurements(in.measured, r.index, d);
      const ScenarioFrame frame = build_frame(in.net, in.fleet, w, m,
                                              cfg.dt_hours, d, cfg.heating,
                                              cfg.n_poly);
      const DeviationBounds b = max_deviation(frame, 0, d);
      r.dp_max = b.dp_max;
      r.dp_min = b.dp_min;
      r.ok = true;
    } catch (const InputError& e) {
      r.skip_reason = e.what();
    }
  });

  RunResult res;
  std::ostringstream table, skipped;
  table << "date,hour,dp_max_pu,dp_min_pu\n";
  skipped << "date,hour,reason\n";
  std::map<int, svg::LineSeries> up, down;
  for (const Record& r : records) {
    if (r.ok) {
      table << r.date << ',' << r.hour << ',' << detail::num(r.dp_max) << ','
            << detail::num(r.dp_min) << '\n';
      char hh[16];
      std::snprintf(hh, sizeof hh, "%02d:00", r.hour);
      if (up.find(r.hour) == up.end()) {
        up[r.hour].label = std::string("max dP ") + hh;
        down[r.hour].label = std::string("min dP ") + hh;
      }
      up[r.hour].points.push_back({r.day_offset, r.dp_max});
      down[r.hour].points.push_back({r.day_offset, r.dp_min});
    } else {
      skipped << r.date << ',' << r.hour << ',' << r.skip_reason << '\n';
      res.notes.push_back("skipped " + r.date + " " + std::to_string(r.hour) +
                          ":00: " + r.skip_reason);
    }
  }
  std::vector<svg::LineSeries> series;
  for (auto& [h, s] : up) series.push_back(std::move(s));
  for (auto& [h, s] : down) series.push_back(std::move(s));

  const std::filesystem::path out(cfg.out_dir);
  res.files.push_back(detail::write_file(out, "seasonal.csv", table.str()));
  res.files.push_back(
      detail::write_file(out, "seasonal_skipped.csv", skipped.str()));
  res.files.push_back(detail::write_file(
      out, "seasonal.svg",
      svg::line_chart_svg(series, "days since " + cfg.date_start, "dP (p.u.)",
                          "Sustained flexibility by start time")));
  return res;
}

inline RunResult run_penetration(const ScenarioConfig& cfg) {
  if (cfg.multipliers.empty())
    throw InputError("penetration mode needs a nonempty multiplier list");
  for (double m : cfg.multipliers)
    if (!(m >= 0.0) || !std::isfinite(m))
      throw InputError("multipliers must be finite and >= 0");
  std::vector<double> mult = cfg.multipliers;
  std::sort(mult.begin(), mult.end());
  mult.erase(std::unique(mult.begin(), mult.end()), mult.end());

  const int d = cfg.duration_steps > 0 ? cfg.duration_steps : 8;
  const auto in = detail::load_inputs(cfg, true, true);
  detail::check_window(cfg, in.weather.size(), d);

  // The residual is identified once, from the unscaled fleet, and held fixed
  // while heat-pump capacity is scaled.
  const WeatherSeries w = detail::slice_weather(in.weather, cfg.t0, d);
  const MeasurementSeries m = detail::slice_measurements(in.measured, cfg.t0, d);
  const ScenarioFrame base_frame = build_frame(in.net, in.fleet, w, m,
                                               cfg.dt_hours, d, cfg.heating,
                                               cfg.n_poly);

  struct Row {
    double multiplier = 0.0;
    double dp_max = 0.0, dp_min = 0.0;
  };
  std::vector<Row> rows(mult.size());
  parallel_for(static_cast<int>(mult.size()), [&](int k) {
    const double scale = mult[static_cast<std::size_t>(k)];
    std::vector<Device> fleet;
    for (const Device& dev : in.fleet) {
      if (const auto* load = std::get_if<ControllableLoad>(&dev);
          load != nullptr && load->kind == LoadKind::heat_pump) {
        if (scale == 0.0) continue;
        ControllableLoad scaled = *load;
        scaled.p_rated *= scale;
        fleet.emplace_back(scaled);
      } else {
        fleet.push_back(dev);
      }
    }
    const ScenarioFrame frame = frame_from_fixed_injections(
        in.net, std::move(fleet), w, base_frame.nonflex, cfg.dt_hours, d,
        cfg.heating, cfg.n_poly);
    const DeviationBounds b = max_deviation(frame, 0, d);
    rows[k] = {scale, b.dp_max, b.dp_min};
  });

  RunResult res;
  std::ostringstream table;
  table << "multiplier,dp_max_pu,dp_min_pu\n";
  svg::LineSeries s_up, s_down;
  s_up.label = "max dP";
  s_down.label = "min dP";
  for (const Row& r : rows) {
    table << detail::num(r.multiplier) << ',' << detail::num(r.dp_max) << ','
          << detail::num(r.dp_min) << '\n';
    s_up.points.push_back({r.multiplier, r.dp_max});
    s_down.points.push_back({r.multiplier, r.dp_min});
  }
  const std::filesystem::path out(cfg.out_dir);
  res.files.push_back(detail::write_file(out, "penetration.csv", table.str()));
  res.files.push_back(detail::write_file(
      out, "penetration.svg",
      svg::line_chart_svg({s_up, s_down}, "heat pump capacity multiplier",
                          "dP (p.u.)", "Flexibility vs heat pump penetration")));
  return res;
}

inline RunResult run_identify(const ScenarioConfig& cfg) {
  detail::require_file(cfg.weather_path, "weather");
  detail::require_file(cfg.measurements_path, "measurements");
  if (cfg.total_pv_capacity_mw < 0.0)
    throw InputError("identify mode needs total_pv_capacity_mw >= 0");
  const WeatherSeries weather = load_weather_csv(cfg.weather_path);
  const MeasurementSeries measured =
      load_measurement_csv(cfg.measurements_path, weather);
  const IdentifyOptions opt;

  struct NodeOut {
    std::string node;
    PvFit pv;
    HpFit hp;
    bool pv_ok = false, hp_ok = false;
    std::string pv_error, hp_error;
  };
  std::vector<NodeOut> nodes;
  std::map<std::string, PvFit> pv_fits;
  for (const auto& [node, series] : measured.node_p_mw) {
    NodeOut n;
    n.node = node;
    try {
      n.pv = fit_pv_slope(measured, node, opt);
      n.pv_ok = true;
      pv_fits[node] = n.pv;
    } catch (const InputError& e) {
      n.pv_error = e.what();
    }
    try {
      n.hp = fit_hp_polynomial(measured, node, opt);
      n.hp_ok = true;
    } catch (const InputError& e) {
      n.hp_error = e.what();
    }
    nodes.push_back(std::move(n));
  }
  const std::map<std::string, double> alloc =
      allocate_pv_capacity(pv_fits, cfg.total_pv_capacity_mw);

  nlohmann::json doc;
  doc["total_pv_capacity_mw"] = cfg.total_pv_capacity_mw;
  doc["nodes"] = nlohmann::json::array();
  auto diag_json = [](const FitDiagnostics& d) {
    return nlohmann::json{{"r2", d.r2},
                          {"f_stat", d.f_stat},
                          {"p_value", d.p_value},
                          {"n", d.n},
                          {"significant", d.significant}};
  };
  for (const NodeOut& n : nodes) {
    nlohmann::json jn;
    jn["node"] = n.node;
    jn["pv_capacity_mw"] = n.pv_ok ? alloc.at(n.node) : 0.0;
    jn["hp_capacity_mw"] =
        n.hp_ok && n.hp.diag.significant
            ? hp_capacity_from_fit(n.hp, opt.t_full, opt.t_zero)
            : 0.0;
    if (n.pv_ok) {
      jn["pv_slope_mw_per_wm2"] = n.pv.slope;
      jn["pv_fit"] = diag_json(n.pv.diag);
    } else {
      jn["pv_error"] = n.pv_error;
    }
    if (n.hp_ok) {
      jn["hp_coefficients"] = {n.hp.a, n.hp.b, n.hp.c};
      jn["hp_fit"] = diag_json(n.hp.diag);
    } else {
      jn["hp_error"] = n.hp_error;
    }
    doc["nodes"].push_back(std::move(jn));
  }

  RunResult res;
  res.files.push_back(detail::write_file(std::filesystem::path(cfg.out_dir),
                                         "estimates.json", doc.dump(2) + "\n"));
  return res;
}

inline RunResult run_analysis(const ScenarioConfig& cfg) {
  if (cfg.analysis == "single") return run_single(cfg);
  if (cfg.analysis == "durations") return run_durations(cfg);
  if (cfg.analysis == "seasonal") return run_seasonal(cfg);
  if (cfg.analysis == "penetration") return run_penetration(cfg);
  if (cfg.analysis == "identify") return run_identify(cfg);
  throw InputError("unknown analysis '" + cfg.analysis + "'");
}

}  // namespace flexregion::app
