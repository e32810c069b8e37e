#pragma once

// Flexible device models. Everything uses the injection convention:
// generation and discharge are positive, consumption is negative. Operating
// regions live in the (P, Q) plane in per-unit.

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "flexregion/geometry.hpp"
#include "flexregion/grid.hpp"

namespace flexregion {

struct BessDevice {
  std::string bus;
  double s_max = 0.0;      // apparent-power rating, p.u.
  double capacity_c = 0.0; // energy capacity, p.u.*h
  double soc_init = 0.5;
  double soc_min = 0.0;
  double soc_max = 1.0;
  int n_poly = 12;         // vertices of the inscribed rating polygon
};

struct PvDevice {
  std::string bus;
  double p_capacity = 0.0; // installed peak active power, p.u.
  double pf_min = 0.9;     // lowest admissible power factor at full output
};

enum class LoadKind { heat_pump, other };

struct ControllableLoad {
  std::string bus;
  LoadKind kind = LoadKind::heat_pump;
  double p_rated = 0.0;       // maximum active consumption, p.u.
  double power_factor = 0.95; // fixed operating power factor
  double temp_init = 21.0;    // degC, heat pumps only
  double temp_min = 19.0;
  double temp_max = 23.0;
};

using Device = std::variant<BessDevice, PvDevice, ControllableLoad>;

inline const std::string& device_bus(const Device& dev) {
  return std::visit([](const auto& d) -> const std::string& { return d.bus; }, dev);
}

inline void validate_device(const Device& dev) {
  if (const auto* b = std::get_if<BessDevice>(&dev)) {
    if (!(b->s_max > 0.0)) throw InputError("bess '" + b->bus + "': s_max must be > 0");
    if (!(b->capacity_c > 0.0)) throw InputError("bess '" + b->bus + "': capacity must be > 0");
    if (b->n_poly < 3) throw InputError("bess '" + b->bus + "': n_poly must be >= 3");
    if (!(0.0 <= b->soc_min && b->soc_min <= b->soc_max && b->soc_max <= 1.0))
      throw InputError("bess '" + b->bus + "': need 0 <= soc_min <= soc_max <= 1");
    if (b->soc_init < b->soc_min || b->soc_init > b->soc_max)
      throw InputError("bess '" + b->bus + "': soc_init outside [soc_min, soc_max]");
  } else if (const auto* p = std::get_if<PvDevice>(&dev)) {
    if (p->p_capacity < 0.0) throw InputError("pv '" + p->bus + "': negative capacity");
    if (!(p->pf_min > 0.0 && p->pf_min <= 1.0))
      throw InputError("pv '" + p->bus + "': pf_min outside (0, 1]");
  } else {
    const auto& l = std::get<ControllableLoad>(dev);
    if (l.p_rated < 0.0) throw InputError("load '" + l.bus + "': negative rating");
    if (!(l.power_factor > 0.0 && l.power_factor <= 1.0))
      throw InputError("load '" + l.bus + "': power factor outside (0, 1]");
    if (l.kind == LoadKind::heat_pump && !(l.temp_min < l.temp_max))
      throw InputError("load '" + l.bus + "': need temp_min < temp_max");
    if (l.kind == LoadKind::heat_pump &&
        (l.temp_init < l.temp_min || l.temp_init > l.temp_max))
      throw InputError("load '" + l.bus + "': temp_init outside comfort band");
  }
}

// Storage operating region: regular n-gon inscribed in the apparent-power
// circle. Conservative by construction; its inradius is s_max*cos(pi/n).
inline PolygonRegion bess_region(const BessDevice& dev) {
  return regular_polygon(dev.s_max, dev.n_poly);
}

// State of charge after one step of duration dt hours at constant injection
// p (discharge positive, hence the minus).
inline double soc_step(double soc, double p, double capacity_c, double dt) {
  if (!(capacity_c > 0.0)) throw InputError("soc_step: capacity must be > 0");
  if (!(dt > 0.0)) throw InputError("soc_step: dt must be > 0");
  return soc - dt * p / capacity_c;
}

// Snapshot region of a PV inverter that may curtail from the current
// available power p_max down to zero and absorb or supply reactive power up
// to the power-factor limit at its actual output.
inline PolygonRegion pv_region(const PvDevice& dev, double p_max) {
  if (p_max < -1e-12 || p_max > dev.p_capacity + 1e-12)
    throw InputError("pv '" + dev.bus + "': available power outside [0, capacity]");
  p_max = std::clamp(p_max, 0.0, dev.p_capacity);
  PolygonRegion region;
  if (p_max <= 0.0) {
    region.vertices = {{0.0, 0.0}};
    return region;
  }
  const double phi = std::acos(std::clamp(dev.pf_min, 0.0, 1.0));
  const double q_max = p_max * std::tan(phi);
  if (q_max <= 0.0) {
    region.vertices = {{0.0, 0.0}, {p_max, 0.0}};
    return region;
  }
  region.vertices = {{0.0, 0.0}, {p_max, -q_max}, {p_max, q_max}};
  return region;
}

// Snapshot region of a fixed-power-factor load: the segment from zero
// consumption to rated consumption.
inline PolygonRegion load_region(const ControllableLoad& dev) {
  PolygonRegion region;
  if (dev.p_rated <= 0.0) {
    region.vertices = {{0.0, 0.0}};
    return region;
  }
  const double phi = std::acos(std::clamp(dev.power_factor, 0.0, 1.0));
  const double q = dev.p_rated * std::tan(phi);
  region.vertices = {{0.0, 0.0}, {-dev.p_rated, -q}};
  return region;
}

// Building temperature after one step when the heat pump runs at p_flex
// instead of its baseline p_base. Heat output scales with the power ratio;
// at baseline the building is in balance (losses eat exactly q_heat), so
// only the deviation from baseline moves the temperature.
inline double temperature_step(double temp, double p_flex, double p_base,
                               double q_heat, double dt) {
  if (!(dt > 0.0)) throw InputError("temperature_step: dt must be > 0");
  if (p_base == 0.0) {
    if (p_flex != 0.0)
      throw InputError("temperature_step: no thermal flexibility available");
    return temp;
  }
  return temp + (p_flex / p_base - 1.0) * q_heat * dt;
}

inline std::vector<Device> fleet_from_json(const nlohmann::json& doc,
                                           double base_mva) {
  if (!(base_mva > 0.0)) throw InputError("fleet: base_mva must be > 0");
  if (!doc.is_array()) throw InputError("fleet document must be an array");
  std::vector<Device> fleet;
  try {
    for (const auto& jd : doc) {
      const std::string type = jd.at("type").get<std::string>();
      if (type == "bess") {
        BessDevice d;
        d.bus = jd.at("bus").get<std::string>();
        d.s_max = jd.at("s_max_mw").get<double>() / base_mva;
        d.capacity_c = jd.at("capacity_mwh").get<double>() / base_mva;
        d.soc_init = jd.value("soc_init", 0.5);
        d.soc_min = jd.value("soc_min", 0.0);
        d.soc_max = jd.value("soc_max", 1.0);
        d.n_poly = jd.value("n_poly", 12);
        fleet.emplace_back(d);
      } else if (type == "pv") {
        PvDevice d;
        d.bus = jd.at("bus").get<std::string>();
        d.p_capacity = jd.at("p_capacity_mw").get<double>() / base_mva;
        d.pf_min = jd.value("pf_min", 0.9);
        fleet.emplace_back(d);
      } else if (type == "load") {
        ControllableLoad d;
        d.bus = jd.at("bus").get<std::string>();
        const std::string kind = jd.value("kind", std::string("heat_pump"));
        if (kind == "heat_pump") {
          d.kind = LoadKind::heat_pump;
        } else if (kind == "other") {
          d.kind = LoadKind::other;
        } else {
          throw InputError("load '" + d.bus + "': unknown kind '" + kind + "'");
        }
        d.p_rated = jd.at("p_rated_mw").get<double>() / base_mva;
        d.power_factor = jd.value("power_factor", 0.95);
        d.temp_init = jd.value("temp_init", 21.0);
        d.temp_min = jd.value("temp_min", 19.0);
        d.temp_max = jd.value("temp_max", 23.0);
        fleet.emplace_back(d);
      } else {
        throw InputError("unknown device type '" + type + "'");
      }
      validate_device(fleet.back());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("fleet document: ") + e.what());
  }
  return fleet;
}

inline std::vector<Device> load_fleet_file(const std::string& path,
                                           double base_mva) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open fleet file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("fleet file '" + path + "': " + e.what());
  }
  return fleet_from_json(doc, base_mva);
}

}  // namespace flexregion
