#pragma once

// Aggregated flexibility at the point of common coupling. A scenario frame
// freezes the network, the device fleet and every baseline; the engine then
// assembles per-direction linear programs and sweeps directions until the
// polygon of reachable PCC deviations stops growing.
//
// Conventions: injection-positive powers, PCC deviation = actual export
// minus baseline export, device variables are actual operating points.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "flexregion/devices.hpp"
#include "flexregion/geometry.hpp"
#include "flexregion/grid.hpp"
#include "flexregion/linear_power_flow.hpp"
#include "flexregion/lp.hpp"
#include "flexregion/parallel.hpp"

namespace flexregion {

struct Direction {
  double alpha = 0.0;
  double beta = 0.0;

  Direction(double a, double b) {
    const double n = std::hypot(a, b);
    if (!(n > 0.0)) throw InputError("direction must be nonzero");
    alpha = a / n;
    beta = b / n;
  }

  // Objective weights whose minimizer is the support point of the region in
  // the direction (cos(angle), sin(angle)).
  static Direction support(double angle) {
    return Direction(-std::cos(angle), -std::sin(angle));
  }
};

struct PQSeries {
  std::vector<double> p;
  std::vector<double> q;
};

struct ScenarioFrame {
  Network net;
  std::vector<Device> fleet;
  std::vector<PQSeries> device_baseline;           // per device
  std::vector<std::vector<double>> device_q_heat;  // degC per hour at baseline, heat pumps
  std::vector<PQSeries> nonflex;                   // per bus, fixed injections
  PQSeries pcc_baseline;                           // export at the PCC
  double dt = 0.25;                                // hours per step
  int horizon = 0;                                 // steps available
  int n_poly = 12;                                 // line-rating polygon vertices
};

namespace detail {

inline void require_series(const PQSeries& s, int horizon, const std::string& what) {
  if (static_cast<int>(s.p.size()) != horizon || static_cast<int>(s.q.size()) != horizon)
    throw InputError(what + ": series length differs from horizon");
  for (double v : s.p)
    if (std::isnan(v)) throw InputError(what + ": gap in active power series");
  for (double v : s.q)
    if (std::isnan(v)) throw InputError(what + ": gap in reactive power series");
}

inline PolygonRegion device_region_at(const Device& dev, const PQSeries& base, int t) {
  if (const auto* b = std::get_if<BessDevice>(&dev)) return bess_region(*b);
  if (const auto* p = std::get_if<PvDevice>(&dev)) return pv_region(*p, base.p[static_cast<std::size_t>(t)]);
  return load_region(std::get<ControllableLoad>(dev));
}

}  // namespace detail

inline void validate_frame(const ScenarioFrame& f) {
  if (f.horizon < 1) throw InputError("frame: horizon must be >= 1");
  if (!(f.dt > 0.0)) throw InputError("frame: dt must be > 0");
  if (f.n_poly < 3) throw InputError("frame: n_poly must be >= 3");
  const auto violations = validate_network(f.net);
  if (!violations.empty())
    throw InputError("frame: invalid network: " + violations.front().element + " " +
                     violations.front().message);
  if (f.device_baseline.size() != f.fleet.size() ||
      f.device_q_heat.size() != f.fleet.size())
    throw InputError("frame: per-device series count differs from fleet size");
  if (static_cast<int>(f.nonflex.size()) != f.net.n_buses())
    throw InputError("frame: need one fixed-injection series per bus");

  for (std::size_t j = 0; j < f.fleet.size(); ++j) {
    const Device& dev = f.fleet[j];
    validate_device(dev);
    f.net.bus_index(device_bus(dev));  // throws on unknown bus
    detail::require_series(f.device_baseline[j], f.horizon,
                           "device '" + device_bus(dev) + "' baseline");
    const bool is_hp = std::holds_alternative<ControllableLoad>(dev) &&
                       std::get<ControllableLoad>(dev).kind == LoadKind::heat_pump;
    if (is_hp) {
      if (static_cast<int>(f.device_q_heat[j].size()) != f.horizon)
        throw InputError("frame: heat pump at '" + device_bus(dev) +
                         "' needs a q_heat series");
      for (double v : f.device_q_heat[j])
        if (std::isnan(v) || v < 0.0)
          throw InputError("frame: q_heat must be finite and >= 0");
    }
    for (int t = 0; t < f.horizon; ++t) {
      const PolygonRegion region = detail::device_region_at(dev, f.device_baseline[j], t);
      const Vec2 pt{f.device_baseline[j].p[static_cast<std::size_t>(t)],
                    f.device_baseline[j].q[static_cast<std::size_t>(t)]};
      if (distance_outside(region, pt) > 1e-7)
        throw InputError("frame: baseline of device at '" + device_bus(dev) +
                         "' leaves its operating region at step " + std::to_string(t));
    }
  }
  for (int i = 0; i < f.net.n_buses(); ++i)
    detail::require_series(f.nonflex[static_cast<std::size_t>(i)], f.horizon,
                           "fixed injections at '" + f.net.buses()[static_cast<std::size_t>(i)].id + "'");
  detail::require_series(f.pcc_baseline, f.horizon, "pcc baseline");

  // The stored PCC baseline must reproduce what the linear model yields for
  // the baseline injections.
  const JacobianBlocks jac = build_jacobian(f.net);
  const ReferenceInjection ref = reference_injections(f.net);
  const LinearStateSolver solver(f.net, jac, ref);
  const int n = f.net.n_buses();
  const int slack = jac.slack;
  for (int t = 0; t < f.horizon; ++t) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      p(i) = f.nonflex[static_cast<std::size_t>(i)].p[static_cast<std::size_t>(t)];
      q(i) = f.nonflex[static_cast<std::size_t>(i)].q[static_cast<std::size_t>(t)];
    }
    for (std::size_t j = 0; j < f.fleet.size(); ++j) {
      const int bus = f.net.bus_index(device_bus(f.fleet[j]));
      p(bus) += f.device_baseline[j].p[static_cast<std::size_t>(t)];
      q(bus) += f.device_baseline[j].q[static_cast<std::size_t>(t)];
    }
    const auto [theta, du] = solver.solve_state(p, q);
    const auto [pm, qm] = injections_from_state(jac, ref, theta, du);
    const double export_p = p(slack) - pm(slack);
    const double export_q = q(slack) - qm(slack);
    if (std::abs(export_p - f.pcc_baseline.p[static_cast<std::size_t>(t)]) > 1e-6 ||
        std::abs(export_q - f.pcc_baseline.q[static_cast<std::size_t>(t)]) > 1e-6)
      throw InputError("frame: pcc baseline inconsistent with the linear model at step " +
                       std::to_string(t));
  }
}

namespace detail {

// Assembles the deviation LP over the window [t0, t0+d). With intertemporal
// constraints enabled the deviation variables are shared across all steps,
// which is exactly the sustained-deviation coupling; without them d must
// be 1 and the LP is a pure snapshot.
inline LinearProgram assemble_window(const ScenarioFrame& f, int t0, int d,
                                     const Direction& dir, bool intertemporal) {
  if (t0 < 0 || d < 1 || t0 + d > f.horizon)
    throw InputError("window [" + std::to_string(t0) + ", " + std::to_string(t0 + d) +
                     ") outside horizon " + std::to_string(f.horizon));

  const int n = f.net.n_buses();
  const int ndev = static_cast<int>(f.fleet.size());
  const JacobianBlocks jac = build_jacobian(f.net);
  const ReferenceInjection ref = reference_injections(f.net);
  const BranchFlowMap bfm = branch_flow_map(f.net);
  const int slack = jac.slack;

  LinearProgram lp;
  auto vname = [](const char* tag, int s, int i) {
    return std::string(tag) + std::to_string(s) + "_" + std::to_string(i);
  };

  const int dp = lp.add_var("dp");
  const int dq = lp.add_var("dq");
  lp.set_objective(dp, dir.alpha);
  lp.set_objective(dq, dir.beta);

  std::vector<int> th(static_cast<std::size_t>(d) * n), du(static_cast<std::size_t>(d) * n);
  std::vector<int> devp(static_cast<std::size_t>(d) * std::max(ndev, 1));
  std::vector<int> devq(devp.size());
  std::vector<int> pccp(static_cast<std::size_t>(d)), pccq(static_cast<std::size_t>(d));
  for (int s = 0; s < d; ++s) {
    for (int i = 0; i < n; ++i) {
      const bool pinned = i == slack;
      th[static_cast<std::size_t>(s * n + i)] =
          lp.add_var(vname("th", s, i), pinned ? 0.0 : -detail::kInf,
                     pinned ? 0.0 : detail::kInf);
      const Bus& bus = f.net.buses()[static_cast<std::size_t>(i)];
      du[static_cast<std::size_t>(s * n + i)] =
          lp.add_var(vname("du", s, i), pinned ? 0.0 : bus.u_min - 1.0,
                     pinned ? 0.0 : bus.u_max - 1.0);
    }
    for (int j = 0; j < ndev; ++j) {
      devp[static_cast<std::size_t>(s * ndev + j)] = lp.add_var(vname("devp", s, j));
      devq[static_cast<std::size_t>(s * ndev + j)] = lp.add_var(vname("devq", s, j));
    }
    pccp[static_cast<std::size_t>(s)] = lp.add_var(vname("pccp", s, 0));
    pccq[static_cast<std::size_t>(s)] = lp.add_var(vname("pccq", s, 0));
  }

  // Intertemporal state variables; index 0 is the (constant) initial state.
  std::vector<std::vector<int>> soc(static_cast<std::size_t>(ndev));
  std::vector<std::vector<int>> temp(static_cast<std::size_t>(ndev));
  if (intertemporal) {
    for (int j = 0; j < ndev; ++j) {
      if (const auto* b = std::get_if<BessDevice>(&f.fleet[static_cast<std::size_t>(j)])) {
        for (int s = 1; s <= d; ++s)
          soc[static_cast<std::size_t>(j)].push_back(
              lp.add_var(vname("soc", s, j), b->soc_min, b->soc_max));
      } else if (const auto* l =
                     std::get_if<ControllableLoad>(&f.fleet[static_cast<std::size_t>(j)])) {
        if (l->kind == LoadKind::heat_pump) {
          for (int s = 1; s <= d; ++s)
            temp[static_cast<std::size_t>(j)].push_back(
                lp.add_var(vname("temp", s, j), l->temp_min, l->temp_max));
        }
      }
    }
  }

  const PolygonRegion line_poly_unit = regular_polygon(1.0, f.n_poly);

  for (int s = 0; s < d; ++s) {
    const int t = t0 + s;
    // Nodal balance: device injections plus fixed injections minus what the
    // linear model absorbs; the slack row additionally exports pcc power.
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, double>> prow, qrow;
      for (int j = 0; j < ndev; ++j) {
        if (f.net.bus_index(device_bus(f.fleet[static_cast<std::size_t>(j)])) != i) continue;
        prow.emplace_back(devp[static_cast<std::size_t>(s * ndev + j)], 1.0);
        qrow.emplace_back(devq[static_cast<std::size_t>(s * ndev + j)], 1.0);
      }
      if (i == slack) {
        prow.emplace_back(pccp[static_cast<std::size_t>(s)], -1.0);
        qrow.emplace_back(pccq[static_cast<std::size_t>(s)], -1.0);
      }
      for (int k = 0; k < n; ++k) {
        if (jac.j_p_theta(i, k) != 0.0)
          prow.emplace_back(th[static_cast<std::size_t>(s * n + k)], -jac.j_p_theta(i, k));
        if (jac.j_p_u(i, k) != 0.0)
          prow.emplace_back(du[static_cast<std::size_t>(s * n + k)], -jac.j_p_u(i, k));
        if (jac.j_q_theta(i, k) != 0.0)
          qrow.emplace_back(th[static_cast<std::size_t>(s * n + k)], -jac.j_q_theta(i, k));
        if (jac.j_q_u(i, k) != 0.0)
          qrow.emplace_back(du[static_cast<std::size_t>(s * n + k)], -jac.j_q_u(i, k));
      }
      const double base_p = f.nonflex[static_cast<std::size_t>(i)].p[static_cast<std::size_t>(t)];
      const double base_q = f.nonflex[static_cast<std::size_t>(i)].q[static_cast<std::size_t>(t)];
      lp.add_row(std::move(prow), Rel::eq, ref.p_ref(i) - base_p, vname("balp", s, i));
      lp.add_row(std::move(qrow), Rel::eq, ref.q_ref(i) - base_q, vname("balq", s, i));
    }

    // Device operating regions.
    for (int j = 0; j < ndev; ++j) {
      const Device& dev = f.fleet[static_cast<std::size_t>(j)];
      const PolygonRegion region =
          device_region_at(dev, f.device_baseline[static_cast<std::size_t>(j)], t);
      const int vp = devp[static_cast<std::size_t>(s * ndev + j)];
      const int vq = devq[static_cast<std::size_t>(s * ndev + j)];
      for (const LinearCondition& c : region_conditions(region)) {
        std::vector<std::pair<int, double>> row;
        if (c.a_p != 0.0) row.emplace_back(vp, c.a_p);
        if (c.a_q != 0.0) row.emplace_back(vq, c.a_q);
        lp.add_row(std::move(row), c.equality ? Rel::eq : Rel::le, c.rhs,
                   vname("dev", s, j));
      }
      // A heat pump with no baseline heat demand has nothing to modulate.
      if (const auto* l = std::get_if<ControllableLoad>(&dev)) {
        if (l->kind == LoadKind::heat_pump &&
            f.device_baseline[static_cast<std::size_t>(j)].p[static_cast<std::size_t>(t)] == 0.0)
          lp.add_row({{vp, 1.0}}, Rel::eq, 0.0, vname("hp0", s, j));
      }
    }

    // Line ratings: the rating polygon applied to linearized sending-end flow.
    for (std::size_t li = 0; li < f.net.lines().size(); ++li) {
      const Line& line = f.net.lines()[li];
      const BranchFlow& bf = bfm.lines[li];
      for (const LinearCondition& c : region_conditions(line_poly_unit)) {
        std::vector<std::pair<int, double>> row;
        for (int k = 0; k < n; ++k) {
          const double cth = c.a_p * bf.p_theta(k) + c.a_q * bf.q_theta(k);
          const double cdu = c.a_p * bf.p_du(k) + c.a_q * bf.q_du(k);
          if (cth != 0.0) row.emplace_back(th[static_cast<std::size_t>(s * n + k)], cth);
          if (cdu != 0.0) row.emplace_back(du[static_cast<std::size_t>(s * n + k)], cdu);
        }
        const double rhs =
            c.rhs * line.s_max - (c.a_p * bf.p_const + c.a_q * bf.q_const);
        lp.add_row(std::move(row), Rel::le, rhs, "line" + std::to_string(s) + "_" +
                                                     std::to_string(li));
      }
    }

    // Deviation definition: the same (dp, dq) at every step of the window.
    lp.add_row({{dp, 1.0}, {pccp[static_cast<std::size_t>(s)], -1.0}}, Rel::eq,
               -f.pcc_baseline.p[static_cast<std::size_t>(t)], vname("defp", s, 0));
    lp.add_row({{dq, 1.0}, {pccq[static_cast<std::size_t>(s)], -1.0}}, Rel::eq,
               -f.pcc_baseline.q[static_cast<std::size_t>(t)], vname("defq", s, 0));

    if (!intertemporal) continue;

    // Storage balance and building temperature recursions.
    for (int j = 0; j < ndev; ++j) {
      const Device& dev = f.fleet[static_cast<std::size_t>(j)];
      const int vp = devp[static_cast<std::size_t>(s * ndev + j)];
      if (const auto* b = std::get_if<BessDevice>(&dev)) {
        const double k = f.dt / b->capacity_c;
        const int cur = soc[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)];
        if (s == 0) {
          lp.add_row({{cur, 1.0}, {vp, k}}, Rel::eq, b->soc_init, vname("soc", s, j));
        } else {
          const int prev = soc[static_cast<std::size_t>(j)][static_cast<std::size_t>(s - 1)];
          lp.add_row({{cur, 1.0}, {prev, -1.0}, {vp, k}}, Rel::eq, 0.0,
                     vname("soc", s, j));
        }
      } else if (const auto* l = std::get_if<ControllableLoad>(&dev)) {
        if (l->kind != LoadKind::heat_pump) continue;
        const double base =
            f.device_baseline[static_cast<std::size_t>(j)].p[static_cast<std::size_t>(t)];
        const int cur = temp[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)];
        const double qh = f.device_q_heat[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
        // dT = q_heat*dt*(p/p_base - 1): zero at baseline, -q_heat*dt at
        // full shed, +q_heat*dt when doubling output.
        std::vector<std::pair<int, double>> row{{cur, 1.0}};
        double rhs = -qh * f.dt;
        if (base != 0.0) row.emplace_back(vp, -qh * f.dt / base);
        else rhs = 0.0;  // injection pinned to zero elsewhere
        if (s == 0) {
          rhs += l->temp_init;
        } else {
          row.emplace_back(temp[static_cast<std::size_t>(j)][static_cast<std::size_t>(s - 1)], -1.0);
        }
        lp.add_row(std::move(row), Rel::eq, rhs, vname("temp", s, j));
      }
    }
  }
  return lp;
}

struct SupportPoint {
  double angle = 0.0;
  Vec2 point;
  double support = 0.0;
};

}  // namespace detail

inline LinearProgram assemble_single(const ScenarioFrame& f, int t,
                                     const Direction& dir) {
  return detail::assemble_window(f, t, 1, dir, false);
}

inline LinearProgram assemble_multi(const ScenarioFrame& f, int t0, int d,
                                    const Direction& dir) {
  return detail::assemble_window(f, t0, d, dir, true);
}

struct Polytope {
  std::vector<Vec2> vertices;  // CCW hull of reachable PCC deviations
  double area = 0.0;
  int timestep = 0;
  int duration_steps = 1;
  double dt_hours = 0.25;
  int directions_solved = 0;
  bool converged = true;
};

inline double polygon_area(const Polytope& poly) {
  return polygon_area(poly.vertices);
}

struct SweepOptions {
  double tol_rel_area = 1e-3;
  int initial_directions = 8;
  int max_directions = 512;
  double min_gap = 1e-4;  // radians
};

namespace detail {

inline Vec2 solve_direction(const ScenarioFrame& f, int t0, int d, double angle,
                            bool intertemporal) {
  const LinearProgram lp =
      assemble_window(f, t0, d, Direction::support(angle), intertemporal);
  const LpSolution sol = solve(lp);
  if (sol.status != LpStatus::optimal) {
    throw SolverError("deviation LP " + std::string(to_string(sol.status)) +
                      " at angle " + std::to_string(angle) + " (window " +
                      std::to_string(t0) + "+" + std::to_string(d) + "): " +
                      sol.message);
  }
  return {sol.values[0], sol.values[1]};  // dp, dq are the first two variables
}

inline double hull_area_with_origin(const std::vector<SupportPoint>& pts) {
  std::vector<Vec2> v;
  v.reserve(pts.size() + 1);
  for (const auto& sp : pts) v.push_back(sp.point);
  v.push_back({0.0, 0.0});
  return polygon_area(convex_hull(std::move(v)));
}

// Area of the triangle cut off between two neighboring support points and
// the intersection of their supporting lines; an upper bound on what can
// still be gained between these two directions.
inline double wedge_area(const SupportPoint& a, const SupportPoint& b) {
  const Vec2 ua{std::cos(a.angle), std::sin(a.angle)};
  const Vec2 ub{std::cos(b.angle), std::sin(b.angle)};
  const double det = cross(ua, ub);
  if (det <= 1e-9) return 0.0;
  const Vec2 q{(a.support * ub.y - ua.y * b.support) / det,
               (ua.x * b.support - a.support * ub.x) / det};
  return 0.5 * std::abs(cross(q - a.point, b.point - a.point));
}

inline Polytope sweep_impl(const ScenarioFrame& f, int t0, int d,
                           const SweepOptions& opt, bool intertemporal) {
  validate_frame(f);
  if (t0 < 0 || d < 1 || t0 + d > f.horizon)
    throw InputError("sweep window outside horizon");
  if (!(opt.tol_rel_area > 0.0)) throw InputError("tol_rel_area must be > 0");

  std::vector<detail::SupportPoint> pts;
  auto solve_batch = [&](const std::vector<double>& angles) {
    std::vector<detail::SupportPoint> batch(angles.size());
    parallel_for(static_cast<int>(angles.size()), [&](int i) {
      const double phi = angles[static_cast<std::size_t>(i)];
      const Vec2 p = detail::solve_direction(f, t0, d, phi, intertemporal);
      batch[static_cast<std::size_t>(i)] = {phi, p,
                                            p.x * std::cos(phi) + p.y * std::sin(phi)};
    });
    pts.insert(pts.end(), batch.begin(), batch.end());
  };

  std::vector<double> angles;
  for (int k = 0; k < opt.initial_directions; ++k)
    angles.push_back(2.0 * M_PI * k / opt.initial_directions);
  solve_batch(angles);

  bool converged = false;
  double area_prev = detail::hull_area_with_origin(pts);
  for (;;) {
    std::sort(pts.begin(), pts.end(),
              [](const auto& x, const auto& y) { return x.angle < y.angle; });
    struct Gap {
      double mid;
      double wedge;
    };
    std::vector<Gap> gaps;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& a = pts[i];
      auto b = pts[(i + 1) % pts.size()];
      double b_angle = b.angle;
      if (i + 1 == pts.size()) b_angle += 2.0 * M_PI;
      if (b_angle - a.angle <= opt.min_gap) continue;
      b.angle = b_angle;
      const double w = detail::wedge_area(a, b);
      if (w > 1e-12) gaps.push_back({0.5 * (a.angle + b_angle), w});
    }
    if (gaps.empty()) {
      converged = true;
      break;
    }
    std::sort(gaps.begin(), gaps.end(), [](const Gap& x, const Gap& y) {
      return x.wedge > y.wedge || (x.wedge == y.wedge && x.mid < y.mid);
    });
    const int room = opt.max_directions - static_cast<int>(pts.size());
    if (room <= 0) break;  // direction cap hit, not converged
    if (static_cast<int>(gaps.size()) > room) gaps.resize(static_cast<std::size_t>(room));

    angles.clear();
    for (const Gap& g : gaps) angles.push_back(std::fmod(g.mid, 2.0 * M_PI));
    solve_batch(angles);

    const double area = detail::hull_area_with_origin(pts);
    if (area - area_prev <= opt.tol_rel_area * std::max(area, 1e-12)) {
      converged = true;
      break;
    }
    area_prev = area;
  }

  Polytope poly;
  std::vector<Vec2> support;
  support.reserve(pts.size() + 1);
  for (const auto& sp : pts) support.push_back(sp.point);
  support.push_back({0.0, 0.0});  // the baseline itself is always reachable
  poly.vertices = convex_hull(std::move(support));
  poly.area = polygon_area(poly.vertices);
  poly.timestep = t0;
  poly.duration_steps = d;
  poly.dt_hours = f.dt;
  poly.directions_solved = static_cast<int>(pts.size());
  poly.converged = converged;
  return poly;
}

}  // namespace detail

inline Polytope sweep(const ScenarioFrame& f, int t,
                      const SweepOptions& opt = {}) {
  return detail::sweep_impl(f, t, 1, opt, false);
}

inline Polytope sweep_multi(const ScenarioFrame& f, int t0, int d,
                            const SweepOptions& opt = {}) {
  return detail::sweep_impl(f, t0, d, opt, true);
}

// Largest sustainable raise and deepest sustainable drop of PCC active
// power over the window, from two directed solves.
struct DeviationBounds {
  double dp_max = 0.0;
  double dp_min = 0.0;
};

inline DeviationBounds max_deviation(const ScenarioFrame& f, int t0, int d) {
  validate_frame(f);
  DeviationBounds out;
  out.dp_max = detail::solve_direction(f, t0, d, 0.0, true).x;
  out.dp_min = detail::solve_direction(f, t0, d, M_PI, true).x;
  return out;
}

inline nlohmann::json polytope_to_json(const Polytope& poly) {
  nlohmann::json doc;
  doc["timestep"] = poly.timestep;
  doc["duration_steps"] = poly.duration_steps;
  doc["dt_hours"] = poly.dt_hours;
  doc["area"] = poly.area;
  doc["directions_solved"] = poly.directions_solved;
  doc["converged"] = poly.converged;
  doc["vertices"] = nlohmann::json::array();
  for (const Vec2& v : poly.vertices) doc["vertices"].push_back({v.x, v.y});
  return doc;
}

}  // namespace flexregion
