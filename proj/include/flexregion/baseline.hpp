#pragma once

// Baseline schedules for every device and bus, assembled into a scenario
// frame. PV tracks maximum available power at unity power factor, heat pumps
// hold room temperature against a piecewise-linear heating demand, storage
// idles, and whatever the meters saw beyond that becomes fixed residual load.

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "flexregion/devices.hpp"
#include "flexregion/ffor.hpp"
#include "flexregion/timeseries.hpp"

namespace flexregion {

struct HeatingDemandModel {
  double t_zero = 15.0;  // degC, no heating above this
  double t_full = -8.0;  // degC, full power at and below this
  double q_max = 1.0;    // degC per hour of heating at full power
};

inline void validate_model(const HeatingDemandModel& m) {
  if (!(m.t_full < m.t_zero))
    throw InputError("heating model: t_full must be below t_zero");
  if (!(m.q_max > 0.0)) throw InputError("heating model: q_max must be > 0");
}

// Fraction of rated heat-pump power needed to hold room temperature.
inline double heating_fraction(const HeatingDemandModel& m, double temp_c) {
  return std::clamp((m.t_zero - temp_c) / (m.t_zero - m.t_full), 0.0, 1.0);
}

// Maximum-power-tracking PV production at unity power factor, p.u.
inline PQSeries pv_baseline(double capacity_mw, const WeatherSeries& weather,
                            double base_mva) {
  if (capacity_mw < 0.0) throw InputError("pv_baseline: negative capacity");
  if (!(base_mva > 0.0)) throw InputError("pv_baseline: base_mva must be > 0");
  PQSeries out;
  out.p.reserve(static_cast<std::size_t>(weather.size()));
  for (double irr : weather.irr_wm2) {
    if (is_gap(irr)) {
      out.p.push_back(series_gap());
      continue;
    }
    if (irr < 0.0) throw InputError("pv_baseline: negative irradiance");
    out.p.push_back(capacity_mw * std::min(1.0, irr / 1000.0) / base_mva);
  }
  out.q.assign(out.p.size(), 0.0);
  return out;
}

struct HpBaseline {
  PQSeries pq;                 // p.u., consumption as negative injection
  std::vector<double> q_heat;  // degC per hour at the baseline operating point
};

inline HpBaseline hp_baseline(double capacity_mw, const HeatingDemandModel& model,
                              const WeatherSeries& weather, double power_factor,
                              double base_mva) {
  if (capacity_mw < 0.0) throw InputError("hp_baseline: negative capacity");
  if (!(base_mva > 0.0)) throw InputError("hp_baseline: base_mva must be > 0");
  if (!(power_factor > 0.0 && power_factor <= 1.0))
    throw InputError("hp_baseline: power factor outside (0, 1]");
  validate_model(model);
  const double tan_phi = std::tan(std::acos(power_factor));
  HpBaseline out;
  for (double temp : weather.temp_c) {
    if (is_gap(temp)) {
      out.pq.p.push_back(series_gap());
      out.pq.q.push_back(series_gap());
      out.q_heat.push_back(series_gap());
      continue;
    }
    const double f = heating_fraction(model, temp);
    const double p = -capacity_mw * f / base_mva;
    out.pq.p.push_back(p);
    out.pq.q.push_back(p * tan_phi);
    out.q_heat.push_back(model.q_max * f);
  }
  return out;
}

// What remains of the metered injection once modeled devices are taken out;
// this part is held fixed in every flexibility optimization.
inline std::vector<double> residual_load(const std::vector<double>& measured_inj,
                                         const std::vector<double>& hp_p,
                                         const std::vector<double>& pv_p) {
  if (measured_inj.size() != hp_p.size() || measured_inj.size() != pv_p.size())
    throw InputError("residual_load: misaligned series");
  std::vector<double> out(measured_inj.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = measured_inj[i] - hp_p[i] - pv_p[i];
  return out;
}

namespace detail {

struct FleetBaseline {
  std::vector<PQSeries> pq;
  std::vector<std::vector<double>> q_heat;
};

// Baseline schedules per device: PV follows irradiance, heat pumps follow the
// heating demand model, storage and other loads idle at zero.
inline FleetBaseline fleet_baseline(const Network& net,
                                    const std::vector<Device>& fleet,
                                    const WeatherSeries& window,
                                    const HeatingDemandModel& model,
                                    double base) {
  const int horizon = window.size();
  FleetBaseline out;
  out.pq.reserve(fleet.size());
  out.q_heat.reserve(fleet.size());
  PQSeries zero;
  zero.p.assign(static_cast<std::size_t>(horizon), 0.0);
  zero.q.assign(static_cast<std::size_t>(horizon), 0.0);
  for (const Device& dev : fleet) {
    validate_device(dev);
    net.bus_index(device_bus(dev));
    if (const auto* pv = std::get_if<PvDevice>(&dev)) {
      out.pq.push_back(pv_baseline(pv->p_capacity * base, window, base));
      out.q_heat.emplace_back();
    } else if (const auto* load = std::get_if<ControllableLoad>(&dev);
               load != nullptr && load->kind == LoadKind::heat_pump) {
      HpBaseline hb = hp_baseline(load->p_rated * base, model, window,
                                  load->power_factor, base);
      out.pq.push_back(std::move(hb.pq));
      out.q_heat.push_back(std::move(hb.q_heat));
    } else {
      out.pq.push_back(zero);
      out.q_heat.emplace_back();
    }
  }
  return out;
}

}  // namespace detail

// Frame assembly from already-fixed per-bus injections: synthesizes device
// baselines from weather, then the PCC baseline through the linear model.
inline ScenarioFrame frame_from_fixed_injections(
    const Network& net, std::vector<Device> fleet, const WeatherSeries& weather,
    std::vector<PQSeries> nonflex, double dt, int horizon,
    const HeatingDemandModel& model = {}, int n_poly = 12) {
  if (horizon < 1 || horizon > weather.size())
    throw InputError("build_frame: horizon outside the weather series");
  if (!(dt > 0.0)) throw InputError("build_frame: dt must be > 0");
  if (weather.size() >= 2) {
    const double step_h = (weather.t[1].minutes - weather.t[0].minutes) / 60.0;
    if (std::abs(step_h - dt) > 1e-9)
      throw InputError("build_frame: dt differs from the weather grid spacing");
  }
  validate_model(model);

  WeatherSeries window;
  window.t.assign(weather.t.begin(), weather.t.begin() + horizon);
  window.temp_c.assign(weather.temp_c.begin(), weather.temp_c.begin() + horizon);
  window.irr_wm2.assign(weather.irr_wm2.begin(), weather.irr_wm2.begin() + horizon);

  ScenarioFrame frame;
  frame.net = net;
  frame.dt = dt;
  frame.horizon = horizon;
  frame.n_poly = n_poly;
  frame.nonflex = std::move(nonflex);
  const double base = net.base_mva();

  auto fb = detail::fleet_baseline(net, fleet, window, model, base);
  frame.device_baseline = std::move(fb.pq);
  frame.device_q_heat = std::move(fb.q_heat);
  frame.fleet = std::move(fleet);

  if (frame.nonflex.size() != static_cast<std::size_t>(net.n_buses()))
    throw InputError("build_frame: fixed injection series count differs from bus count");
  for (const PQSeries& nf : frame.nonflex) {
    if (nf.p.size() != static_cast<std::size_t>(horizon) ||
        nf.q.size() != static_cast<std::size_t>(horizon))
      throw InputError("build_frame: fixed injection series length differs from horizon");
  }

  // PCC baseline through the linear model, so deviations are measured against
  // a model-consistent reference.
  const JacobianBlocks jac = build_jacobian(net);
  const ReferenceInjection ref = reference_injections(net);
  const LinearStateSolver solver(net, jac, ref);
  const int n = net.n_buses();
  frame.pcc_baseline.p.resize(static_cast<std::size_t>(horizon));
  frame.pcc_baseline.q.resize(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      p(i) = frame.nonflex[static_cast<std::size_t>(i)].p[static_cast<std::size_t>(t)];
      q(i) = frame.nonflex[static_cast<std::size_t>(i)].q[static_cast<std::size_t>(t)];
    }
    for (std::size_t j = 0; j < frame.fleet.size(); ++j) {
      const int bus = net.bus_index(device_bus(frame.fleet[j]));
      p(bus) += frame.device_baseline[j].p[static_cast<std::size_t>(t)];
      q(bus) += frame.device_baseline[j].q[static_cast<std::size_t>(t)];
    }
    if (p.hasNaN() || q.hasNaN())
      throw InputError("build_frame: gap in baseline injections at step " +
                       std::to_string(t) + " (" + format_timestamp(window.t[static_cast<std::size_t>(t)]) +
                       ")");
    const auto [theta, du] = solver.solve_state(p, q);
    const auto [pm, qm] = injections_from_state(jac, ref, theta, du);
    frame.pcc_baseline.p[static_cast<std::size_t>(t)] = p(jac.slack) - pm(jac.slack);
    frame.pcc_baseline.q[static_cast<std::size_t>(t)] = q(jac.slack) - qm(jac.slack);
  }

  validate_frame(frame);
  return frame;
}

// Assembles the scenario frame over the first `horizon` steps of the weather
// grid. Buses without measurements carry no residual load; measured node ids
// that match no bus are ignored. Metered MW become per-unit injections here.
inline ScenarioFrame build_frame(const Network& net, std::vector<Device> fleet,
                                 const WeatherSeries& weather,
                                 const MeasurementSeries& measured, double dt,
                                 int horizon,
                                 const HeatingDemandModel& model = {},
                                 int n_poly = 12) {
  if (horizon < 1 || horizon > weather.size())
    throw InputError("build_frame: horizon outside the weather series");
  if (!measured.node_p_mw.empty()) {
    if (measured.size() < horizon)
      throw InputError("build_frame: measurements shorter than the horizon");
    for (int t = 0; t < horizon; ++t) {
      if (measured.weather.t[static_cast<std::size_t>(t)] !=
          weather.t[static_cast<std::size_t>(t)])
        throw InputError("build_frame: measurement and weather grids differ");
    }
  }
  validate_model(model);
  const double base = net.base_mva();

  WeatherSeries window;
  window.t.assign(weather.t.begin(), weather.t.begin() + horizon);
  window.temp_c.assign(weather.temp_c.begin(), weather.temp_c.begin() + horizon);
  window.irr_wm2.assign(weather.irr_wm2.begin(), weather.irr_wm2.begin() + horizon);
  const auto fb = detail::fleet_baseline(net, fleet, window, model, base);

  const std::vector<double> zeros(static_cast<std::size_t>(horizon), 0.0);
  std::vector<PQSeries> nonflex(static_cast<std::size_t>(net.n_buses()));
  for (int i = 0; i < net.n_buses(); ++i) {
    const std::string& id = net.buses()[static_cast<std::size_t>(i)].id;
    PQSeries nf;
    nf.q = zeros;  // meters see active power only
    auto it = measured.node_p_mw.find(id);
    if (it == measured.node_p_mw.end()) {
      nf.p = zeros;  // unmetered bus: no residual load
      nonflex[static_cast<std::size_t>(i)] = std::move(nf);
      continue;
    }
    std::vector<double> measured_inj(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
      const double mw = it->second[static_cast<std::size_t>(t)];
      measured_inj[static_cast<std::size_t>(t)] = is_gap(mw) ? series_gap() : -mw / base;
    }
    std::vector<double> dev_p = zeros;
    for (std::size_t j = 0; j < fleet.size(); ++j) {
      if (net.bus_index(device_bus(fleet[j])) != i) continue;
      for (int t = 0; t < horizon; ++t)
        dev_p[static_cast<std::size_t>(t)] += fb.pq[j].p[static_cast<std::size_t>(t)];
    }
    nf.p = residual_load(measured_inj, dev_p, zeros);
    nonflex[static_cast<std::size_t>(i)] = std::move(nf);
  }

  return frame_from_fixed_injections(net, std::move(fleet), weather,
                                     std::move(nonflex), dt, horizon, model,
                                     n_poly);
}

}  // namespace flexregion
