// Acceptance gate: ten end-to-end checks, one per release criterion. Each
// prints a single "criterion N PASS/FAIL ..." line before failing the test
// case, so a full run always yields ten verdict lines in order.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <flexregion/app.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace flexregion;

namespace {

const std::string kDataDir = FFOR_DATA_DIR;
const std::string kCliPath = FFOR_CLI_PATH;

std::string numstr(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// Collects failures so the verdict line always prints, then fails the case.
struct Criterion {
  int id;
  std::string label;
  std::vector<std::string> errors;

  Criterion(int id_, std::string label_) : id(id_), label(std::move(label_)) {}

  void expect(bool ok, const std::string& what) {
    if (!ok) errors.push_back(what);
  }

  void finish() {
    std::printf("criterion %d %s %s\n", id, errors.empty() ? "PASS" : "FAIL",
                label.c_str());
    std::fflush(stdout);
    for (const std::string& e : errors) UNSCOPED_INFO(e);
    REQUIRE(errors.empty());
  }
};

// Every polytope the suite computes is checked at creation and logged;
// criterion 5 audits the accumulated set explicitly.
std::vector<Polytope>& polytope_log() {
  static std::vector<Polytope> log;
  return log;
}

Polytope tracked_sweep(const ScenarioFrame& f, int t,
                       const SweepOptions& opt = {}) {
  Polytope poly = sweep(f, t, opt);
  oracle::check_polytope_invariants(poly);
  polytope_log().push_back(poly);
  return poly;
}

Polytope tracked_sweep_multi(const ScenarioFrame& f, int t0, int d,
                             const SweepOptions& opt = {}) {
  Polytope poly = sweep_multi(f, t0, d, opt);
  oracle::check_polytope_invariants(poly);
  polytope_log().push_back(poly);
  return poly;
}

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("ffor_acc_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Curtailable PV as the only device, producing at the available maximum.
ScenarioFrame pv_mppt_frame() {
  PvDevice pv;
  pv.bus = "n1";
  pv.p_capacity = 0.5;
  pv.pf_min = 0.9;
  const WeatherSeries w = fixtures::flat_weather(4, 20.0, 600.0);
  MeasurementSeries empty;
  empty.weather = w;
  return build_frame(fixtures::toy2(), {pv}, w, empty, 0.25, 4);
}

// One heat pump on the two-bus grid; temp_c selects the heating fraction.
ScenarioFrame heat_pump_frame(double temp_c) {
  ControllableLoad hp;
  hp.bus = "n1";
  hp.kind = LoadKind::heat_pump;
  hp.p_rated = 0.5;
  const WeatherSeries w = fixtures::flat_weather(4, temp_c, 0.0);
  MeasurementSeries empty;
  empty.weather = w;
  return build_frame(fixtures::toy2(), {hp}, w, empty, 0.25, 4);
}

// Two radial feeders. Feeder A carries fixed generation at exactly its head
// line's rating, so at baseline the line is saturated in the export
// direction and the storage there cannot raise the PCC export at all. Heat
// pumps (scaled by `multiplier`) import on the same feeder; their baseline
// consumption relieves the head line by 0.12 per multiplier step, which is
// the only way upward flexibility can grow, until the storage rating 0.45
// caps it. The pumps start at the lower temperature band edge, so they can
// never shed below baseline and contribute no upward headroom themselves.
// Feeder B only moves the PCC baseline away from zero.
ScenarioFrame saturating_feeder_frame(double multiplier) {
  Bus pcc;
  pcc.id = "pcc";
  pcc.kind = BusKind::slack;
  pcc.u_min = 0.8;
  pcc.u_max = 1.2;
  Bus na = pcc;
  na.id = "nA";
  na.kind = BusKind::load;
  Bus nb = na;
  nb.id = "nB";
  Line la;
  la.from = "pcc";
  la.to = "nA";
  la.g = 0.0;
  la.b = -10.0;
  la.b_sh = 0.0;
  la.s_max = 0.5;
  Line lb;
  lb.from = "pcc";
  lb.to = "nB";
  lb.g = 0.0;
  lb.b = -8.0;
  lb.b_sh = 0.0;
  lb.s_max = 5.0;
  const Network net({pcc, na, nb}, {la, lb}, 1.0, 1.0);

  BessDevice bess;
  bess.bus = "nA";
  bess.s_max = 0.45;
  bess.capacity_c = 100.0;  // energy never binds here
  bess.soc_init = 0.5;
  bess.soc_min = 0.0;
  bess.soc_max = 1.0;
  bess.n_poly = 12;
  std::vector<Device> fleet{bess};
  if (multiplier > 0.0) {
    ControllableLoad hp;
    hp.bus = "nA";
    hp.kind = LoadKind::heat_pump;
    hp.p_rated = 0.2 * multiplier;
    hp.power_factor = 1.0;
    hp.temp_init = 19.0;  // at the band floor: any net shed is infeasible
    hp.temp_min = 19.0;
    hp.temp_max = 23.0;
    fleet.push_back(hp);
  }

  const int horizon = 4;
  // 1.2 degC puts the default heating model at fraction 0.6 exactly, so the
  // pump baseline draws 0.12 per multiplier step.
  const WeatherSeries w = fixtures::flat_weather(horizon, 1.2, 0.0);
  std::vector<PQSeries> nonflex(3);
  for (auto& nf : nonflex) {
    nf.p.assign(horizon, 0.0);
    nf.q.assign(horizon, 0.0);
  }
  nonflex[1].p.assign(horizon, 0.5);   // generation pinned at the rating
  nonflex[2].p.assign(horizon, -0.3);  // plain load on the second feeder
  return frame_from_fixed_injections(net, std::move(fleet), w,
                                     std::move(nonflex), 0.25, horizon);
}

// Three buses in a chain with losses and shunts, storage mid-feeder and PV
// at the end. Ratings and voltage bands are wide enough that only the
// device regions shape the reachable set.
ScenarioFrame mixed_three_bus_frame() {
  Bus pcc;
  pcc.id = "pcc";
  pcc.kind = BusKind::slack;
  pcc.u_min = 0.85;
  pcc.u_max = 1.15;
  Bus n1 = pcc;
  n1.id = "n1";
  n1.kind = BusKind::load;
  Bus n2 = n1;
  n2.id = "n2";
  Line l1;
  l1.from = "pcc";
  l1.to = "n1";
  l1.g = 1.2;
  l1.b = -8.0;
  l1.b_sh = 0.04;
  l1.s_max = 6.0;
  Line l2;
  l2.from = "n1";
  l2.to = "n2";
  l2.g = 0.9;
  l2.b = -6.0;
  l2.b_sh = 0.03;
  l2.s_max = 6.0;
  const Network net({pcc, n1, n2}, {l1, l2}, 1.0, 1.0);

  BessDevice bess;
  bess.bus = "n1";
  bess.s_max = 0.8;
  bess.capacity_c = 100.0;
  bess.soc_init = 0.5;
  bess.soc_min = 0.0;
  bess.soc_max = 1.0;
  bess.n_poly = 12;
  PvDevice pv;
  pv.bus = "n2";
  pv.p_capacity = 0.5;
  pv.pf_min = 0.9;

  const int horizon = 4;
  const WeatherSeries w = fixtures::flat_weather(horizon, 20.0, 900.0);
  std::vector<PQSeries> nonflex(3);
  for (auto& nf : nonflex) {
    nf.p.assign(horizon, 0.0);
    nf.q.assign(horizon, 0.0);
  }
  nonflex[1].p.assign(horizon, -0.25);
  nonflex[1].q.assign(horizon, -0.08);
  nonflex[2].p.assign(horizon, -0.10);
  nonflex[2].q.assign(horizon, -0.03);
  return frame_from_fixed_injections(net, {bess, pv}, w, std::move(nonflex),
                                     0.25, horizon);
}

// Vertices, boundary points, and random interior mixes of a device region.
std::vector<Vec2> region_samples(const PolygonRegion& region,
                                 std::mt19937& rng) {
  std::vector<Vec2> pts = region.vertices;
  const std::size_t m = region.vertices.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 a = region.vertices[i];
    const Vec2 b = region.vertices[(i + 1) % m];
    for (double t : {0.25, 0.5, 0.75}) pts.push_back(a + t * (b - a));
  }
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  for (int k = 0; k < 24; ++k) {
    const double w0 = ud(rng), w1 = ud(rng), w2 = ud(rng);
    const double s = w0 + w1 + w2;
    if (s <= 0.0) continue;
    pts.push_back((w0 / s) * region.vertices[pick(rng)] +
                  (w1 / s) * region.vertices[pick(rng)] +
                  (w2 / s) * region.vertices[pick(rng)]);
  }
  return pts;
}

// Brute-force reference: maps absolute device operating points through the
// same linear network model the LP uses (solved directly, no optimization)
// and reports the PCC deviation, or nothing when a voltage band or a line
// rating polygon is violated.
struct PccOracle {
  const ScenarioFrame& f;
  JacobianBlocks jac;
  ReferenceInjection ref;
  BranchFlowMap flows;
  LinearStateSolver solver;

  explicit PccOracle(const ScenarioFrame& fr)
      : f(fr),
        jac(build_jacobian(fr.net)),
        ref(reference_injections(fr.net)),
        flows(branch_flow_map(fr.net)),
        solver(fr.net, jac, ref) {}

  std::optional<Vec2> deviation(int t, const std::vector<Vec2>& dev_abs) const {
    const int n = f.net.n_buses();
    Eigen::VectorXd p(n), q(n);
    for (int i = 0; i < n; ++i) {
      p(i) = f.nonflex[static_cast<std::size_t>(i)].p[static_cast<std::size_t>(t)];
      q(i) = f.nonflex[static_cast<std::size_t>(i)].q[static_cast<std::size_t>(t)];
    }
    for (std::size_t j = 0; j < f.fleet.size(); ++j) {
      const int bus = f.net.bus_index(device_bus(f.fleet[j]));
      p(bus) += dev_abs[j].x;
      q(bus) += dev_abs[j].y;
    }
    const auto [theta, du] = solver.solve_state(p, q);
    for (int i = 0; i < n; ++i) {
      const Bus& bus = f.net.buses()[static_cast<std::size_t>(i)];
      if (du(i) < bus.u_min - 1.0 - 1e-9 || du(i) > bus.u_max - 1.0 + 1e-9)
        return std::nullopt;
    }
    for (std::size_t l = 0; l < f.net.lines().size(); ++l) {
      const BranchFlow& bf = flows.lines[l];
      const Vec2 flow{bf.p_const + bf.p_theta.dot(theta) + bf.p_du.dot(du),
                      bf.q_const + bf.q_theta.dot(theta) + bf.q_du.dot(du)};
      const PolygonRegion rating =
          regular_polygon(f.net.lines()[l].s_max, f.n_poly);
      if (distance_outside(rating, flow) > 1e-9) return std::nullopt;
    }
    const auto [pm, qm] = injections_from_state(jac, ref, theta, du);
    const int s = jac.slack;
    return Vec2{(p(s) - pm(s)) - f.pcc_baseline.p[static_cast<std::size_t>(t)],
                (q(s) - qm(s)) - f.pcc_baseline.q[static_cast<std::size_t>(t)]};
  }
};

struct OracleComparison {
  double area_rel_err = 0.0;
  double worst_outside = 0.0;
  int feasible = 0;
  int rejected = 0;
};

OracleComparison compare_with_oracle(const ScenarioFrame& f, int t,
                                     const Polytope& poly, std::mt19937& rng) {
  const PccOracle ora(f);
  std::vector<std::vector<Vec2>> cand;
  for (std::size_t j = 0; j < f.fleet.size(); ++j)
    cand.push_back(region_samples(
        detail::device_region_at(f.fleet[j], f.device_baseline[j], t), rng));

  OracleComparison out;
  std::vector<Vec2> feasible;
  std::vector<std::size_t> idx(cand.size(), 0);
  for (;;) {
    std::vector<Vec2> point(cand.size());
    for (std::size_t j = 0; j < cand.size(); ++j) point[j] = cand[j][idx[j]];
    if (const auto dev = ora.deviation(t, point)) {
      feasible.push_back(*dev);
    } else {
      ++out.rejected;
    }
    std::size_t j = 0;
    for (; j < idx.size(); ++j) {
      if (++idx[j] < cand[j].size()) break;
      idx[j] = 0;
    }
    if (j == idx.size()) break;
  }
  out.feasible = static_cast<int>(feasible.size());

  const PolygonRegion swept{poly.vertices};
  for (const Vec2& pt : feasible)
    out.worst_outside = std::max(out.worst_outside, distance_outside(swept, pt));

  std::vector<Vec2> hull_pts = feasible;
  hull_pts.push_back({0.0, 0.0});  // the baseline itself
  const double oracle_area = polygon_area(convex_hull(std::move(hull_pts)));
  out.area_rel_err =
      std::abs(poly.area - oracle_area) / std::max(oracle_area, 1e-12);
  return out;
}

}  // namespace

TEST_CASE("criterion 1: linearization fidelity") {
  Criterion c(1,
              "jacobian blocks and branch flows match central differences of "
              "the ac equations on 20 random networks (relative error <= 1e-6, "
              "runtime < 5 s)");
  try {
    const auto t_start = std::chrono::steady_clock::now();
    std::mt19937 rng(8161);
    double worst = 0.0;
    auto record = [&](double model, double fd) {
      worst = std::max(worst,
                       std::abs(model - fd) / std::max(1.0, std::abs(fd)));
    };
    for (int trial = 0; trial < 20; ++trial) {
      const Network net = oracle::random_network(rng);
      const int n = net.n_buses();
      const JacobianBlocks jac = build_jacobian(net);
      const ReferenceInjection ref = reference_injections(net);
      const BranchFlowMap flows = branch_flow_map(net);
      const Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(n);
      const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(n);

      const auto [p0, q0] = oracle::ac_injections(net, theta0, u0);
      for (int i = 0; i < n; ++i) {
        record(ref.p_ref(i), p0(i));
        record(ref.q_ref(i), q0(i));
      }
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
          record(jac.j_p_theta(i, k), oracle::central_diff([&](double h) {
                   Eigen::VectorXd th = theta0;
                   th(k) += h;
                   return oracle::ac_injections(net, th, u0).first(i);
                 }));
          record(jac.j_q_theta(i, k), oracle::central_diff([&](double h) {
                   Eigen::VectorXd th = theta0;
                   th(k) += h;
                   return oracle::ac_injections(net, th, u0).second(i);
                 }));
          record(jac.j_p_u(i, k), oracle::central_diff([&](double h) {
                   Eigen::VectorXd u = u0;
                   u(k) += h;
                   return oracle::ac_injections(net, theta0, u).first(i);
                 }));
          record(jac.j_q_u(i, k), oracle::central_diff([&](double h) {
                   Eigen::VectorXd u = u0;
                   u(k) += h;
                   return oracle::ac_injections(net, theta0, u).second(i);
                 }));
        }
      }
      for (std::size_t l = 0; l < net.lines().size(); ++l) {
        const Line& line = net.lines()[l];
        const BranchFlow& bf = flows.lines[l];
        const auto [fp0, fq0] = oracle::ac_branch_flow(net, line, theta0, u0);
        record(bf.p_const, fp0);
        record(bf.q_const, fq0);
        for (int k = 0; k < n; ++k) {
          record(bf.p_theta(k), oracle::central_diff([&](double h) {
                   Eigen::VectorXd th = theta0;
                   th(k) += h;
                   return oracle::ac_branch_flow(net, line, th, u0).first;
                 }));
          record(bf.q_theta(k), oracle::central_diff([&](double h) {
                   Eigen::VectorXd th = theta0;
                   th(k) += h;
                   return oracle::ac_branch_flow(net, line, th, u0).second;
                 }));
          record(bf.p_du(k), oracle::central_diff([&](double h) {
                   Eigen::VectorXd u = u0;
                   u(k) += h;
                   return oracle::ac_branch_flow(net, line, theta0, u).first;
                 }));
          record(bf.q_du(k), oracle::central_diff([&](double h) {
                   Eigen::VectorXd u = u0;
                   u(k) += h;
                   return oracle::ac_branch_flow(net, line, theta0, u).second;
                 }));
        }
      }
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t_start)
                            .count();
    c.expect(worst <= 1e-6,
             "worst relative derivative error " + numstr(worst) + " > 1e-6");
    c.expect(secs < 5.0, "runtime " + numstr(secs) + " s, limit 5 s");
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  c.finish();
}

TEST_CASE("criterion 2: rating polygon inner approximation") {
  Criterion c(2,
              "12-vertex rating polygons are tangent at radius s*cos(pi/12) "
              "within 1e-12 (shortfall at most 3.41%)");
  try {
    const double cos15 = std::cos(M_PI / 12.0);
    for (double s : {1.0, 2.5, 5.0}) {
      const PolygonRegion poly = regular_polygon(s, 12);
      c.expect(poly.vertices.size() == 12,
               "s=" + numstr(s) + ": expected 12 vertices, got " +
                   std::to_string(poly.vertices.size()));
      double inradius = std::numeric_limits<double>::infinity();
      double circumradius = 0.0;
      const std::size_t m = poly.vertices.size();
      for (std::size_t i = 0; i < m; ++i) {
        const Vec2 a = poly.vertices[i];
        const Vec2 b = poly.vertices[(i + 1) % m];
        inradius = std::min(inradius, std::abs(cross(a, b)) / norm(b - a));
        circumradius = std::max(circumradius, norm(a));
      }
      c.expect(std::abs(inradius - s * cos15) <= 1e-12,
               "s=" + numstr(s) + ": inradius " + numstr(inradius) +
                   " differs from " + numstr(s * cos15));
      c.expect(std::abs(circumradius - s) <= 1e-12,
               "s=" + numstr(s) + ": circumradius " + numstr(circumradius) +
                   " differs from the rating");
      c.expect(inradius <= s,
               "s=" + numstr(s) + ": inner approximation exceeds the rating");
    }
    c.expect(1.0 - cos15 <= 0.0341,
             "worst-case shortfall " + numstr(1.0 - cos15) + " above 3.41%");

    const PolygonRegion bess = bess_region(fixtures::toy_bess());
    const PolygonRegion ref = regular_polygon(1.0, 12);
    bool same = bess.vertices.size() == ref.vertices.size();
    for (std::size_t i = 0; same && i < ref.vertices.size(); ++i)
      same = norm(bess.vertices[i] - ref.vertices[i]) <= 1e-15;
    c.expect(same, "storage region is not the rating 12-gon");
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  c.finish();
}

TEST_CASE("criterion 3: oracle equivalence on small instances") {
  Criterion c(3,
              "swept region matches the brute-force feasible-deviation hull "
              "within 3% area; no feasible sample lies more than 1e-3 outside "
              "(runtime < 60 s)");
  try {
    const auto t_start = std::chrono::steady_clock::now();
    std::mt19937 rng(315);
    SweepOptions opt;
    opt.tol_rel_area = 1e-4;

    {
      const ScenarioFrame f = fixtures::toy2f_frame(4);
      const Polytope poly = tracked_sweep(f, 0, opt);
      const OracleComparison cmp = compare_with_oracle(f, 0, poly, rng);
      c.expect(cmp.area_rel_err <= 0.03,
               "storage frame: area error " + numstr(cmp.area_rel_err) +
                   " over " + std::to_string(cmp.feasible) + " samples (" +
                   std::to_string(cmp.rejected) + " rejected)");
      c.expect(cmp.worst_outside <= 1e-3,
               "storage frame: feasible sample " + numstr(cmp.worst_outside) +
                   " outside the swept region");
    }
    {
      const ScenarioFrame f = mixed_three_bus_frame();
      const Polytope poly = tracked_sweep(f, 0, opt);
      const OracleComparison cmp = compare_with_oracle(f, 0, poly, rng);
      c.expect(cmp.area_rel_err <= 0.03,
               "storage+pv frame: area error " + numstr(cmp.area_rel_err) +
                   " over " + std::to_string(cmp.feasible) + " samples (" +
                   std::to_string(cmp.rejected) + " rejected)");
      c.expect(cmp.worst_outside <= 1e-3,
               "storage+pv frame: feasible sample " +
                   numstr(cmp.worst_outside) + " outside the swept region");
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t_start)
                            .count();
    c.expect(secs < 60.0, "runtime " + numstr(secs) + " s, limit 60 s");
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  c.finish();
}

TEST_CASE("criterion 4: energy-limited duration decay") {
  Criterion c(4,
              "two-bus storage frame sustains dP of {1.0, 0.4, 0.2} over "
              "{0.25, 1, 2} h within 1e-4, with strictly nested regions");
  try {
    const ScenarioFrame f = fixtures::toy2f_frame(8);
    const int durations[3] = {1, 4, 8};
    const double expected[3] = {1.0, 0.4, 0.2};
    std::vector<Polytope> polys;
    for (int i = 0; i < 3; ++i) {
      const DeviationBounds b = max_deviation(f, 0, durations[i]);
      const std::string window = numstr(durations[i] * 0.25) + " h";
      c.expect(std::abs(b.dp_max - expected[i]) <= 1e-4,
               window + ": dp_max " + numstr(b.dp_max) + " expected " +
                   numstr(expected[i]));
      c.expect(std::abs(b.dp_min + expected[i]) <= 1e-4,
               window + ": dp_min " + numstr(b.dp_min) + " expected " +
                   numstr(-expected[i]));
      polys.push_back(tracked_sweep_multi(f, 0, durations[i]));
    }
    for (int i = 1; i < 3; ++i) {
      const PolygonRegion outer{polys[static_cast<std::size_t>(i - 1)].vertices};
      double worst = 0.0;
      for (const Vec2& v : polys[static_cast<std::size_t>(i)].vertices)
        worst = std::max(worst, distance_outside(outer, v));
      c.expect(worst <= 1e-6, "d=" + std::to_string(durations[i]) +
                                  " leaves the shorter window's region by " +
                                  numstr(worst));
      c.expect(polys[static_cast<std::size_t>(i)].area <
                   polys[static_cast<std::size_t>(i - 1)].area - 1e-9,
               "nesting is not strict: areas " +
                   numstr(polys[static_cast<std::size_t>(i - 1)].area) +
                   " then " +
                   numstr(polys[static_cast<std::size_t>(i)].area));
    }
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  c.finish();
}

TEST_CASE("criterion 5: origin feasibility and convexity") {
  Criterion c(5,
              "every computed region contains the origin within 1e-7 and is "
              "convex");
  try {
    {
      const ScenarioFrame f = fixtures::toy2f_frame(8);
      tracked_sweep(f, 2);
      tracked_sweep_multi(f, 1, 6);
    }
    tracked_sweep(pv_mppt_frame(), 0);
    tracked_sweep_multi(heat_pump_frame(-5.0), 0, 2);
    for (double m : {0.0, 3.0, 5.0})
      tracked_sweep_multi(saturating_feeder_frame(m), 0, 2);

    std::size_t audited = 0;
    for (const Polytope& poly : polytope_log()) {
      ++audited;
      const std::string tag = "polytope " + std::to_string(audited);
      c.expect(!poly.vertices.empty(), tag + " has no vertices");
      if (poly.vertices.empty()) continue;
      const double d0 =
          distance_outside(PolygonRegion{poly.vertices}, Vec2{0.0, 0.0});
      c.expect(d0 <= 1e-7, tag + ": origin outside by " + numstr(d0));
      if (poly.vertices.size() >= 3)
        c.expect(is_convex_ccw(poly.vertices), tag + " is not convex");
    }
    c.label += " (" + std::to_string(audited) + " audited)";
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  c.finish();
}

TEST_CASE("criterion 6: curtailment-only pv asymmetry") {
  Criterion c(6,
              "pv-only frame at maximum-power tracking yields no upward dP "
              "(max dP <= 1e-7)");
  try {
    const ScenarioFrame f = pv_mppt_frame();
    const Polytope poly = tracked_sweep(f, 0);
    double max_dp = -std::numeric_limits<double>::infinity();
    for (const Vec2& v : poly.vertices) max_dp = std::max(max_dp, v.x);
    c.expect(max_dp <= 1e-7, "a vertex reaches dP " + numstr(max_dp));

    const DeviationBounds b1 = max_deviation(f, 0, 1);
    c.expect(b1.dp_max <= 1e-7, "snapshot dp_max " + numstr(b1.dp_max));
    c.expect(b1.dp_min <= -0.29,
             "full curtailment unavailable: dp_min " + numstr(b1.dp_min));
    const DeviationBounds b4 = max_deviation(f, 0, 4);
    c.expect(b4.dp_max <= 1e-7,
             "sustained window dp_max " + numstr(b4.dp_max));
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  c.finish();
}

TEST_CASE("criterion 7: heat-pump flexibility gain") {
  Criterion c(7,
              "cold-weather heat pump strictly widens both dP bounds versus "
              "the same pump frozen at baseline; with zero heat demand the "
              "gain vanishes (within 1e-12)");
  try {
    const int horizon = 4, d = 2;
    {
      const ScenarioFrame flex = heat_pump_frame(-5.0);
      tracked_sweep_multi(flex, 0, d);
      const DeviationBounds bf = max_deviation(flex, 0, d);

      // same pump folded into the fixed injections, nothing left to control
      const WeatherSeries w = fixtures::flat_weather(horizon, -5.0, 0.0);
      std::vector<PQSeries> nonflex(2);
      nonflex[0].p.assign(horizon, 0.0);
      nonflex[0].q.assign(horizon, 0.0);
      nonflex[1] = flex.device_baseline[0];
      const ScenarioFrame fixed = frame_from_fixed_injections(
          fixtures::toy2(), {}, w, std::move(nonflex), 0.25, horizon);
      const DeviationBounds bx = max_deviation(fixed, 0, d);

      c.expect(std::abs(bx.dp_max) <= 1e-9 && std::abs(bx.dp_min) <= 1e-9,
               "frozen pump still flexes: [" + numstr(bx.dp_min) + ", " +
                   numstr(bx.dp_max) + "]");
      c.expect(bf.dp_max > bx.dp_max + 1e-6,
               "no strict upward gain: " + numstr(bf.dp_max) + " vs " +
                   numstr(bx.dp_max));
      c.expect(bf.dp_min < bx.dp_min - 1e-6,
               "no strict downward gain: " + numstr(bf.dp_min) + " vs " +
                   numstr(bx.dp_min));
      const double shed = -flex.device_baseline[0].p[0];
      c.expect(std::abs(bf.dp_max - shed) <= 1e-6,
               "upward bound " + numstr(bf.dp_max) +
                   " should equal the shed baseline " + numstr(shed));
    }
    {
      const ScenarioFrame flex = heat_pump_frame(20.0);
      c.expect(flex.device_q_heat[0][0] == 0.0,
               "warm weather should imply zero heat demand");
      const DeviationBounds b = max_deviation(flex, 0, d);
      c.expect(std::abs(b.dp_max) <= 1e-12 && std::abs(b.dp_min) <= 1e-12,
               "zero heat demand still flexes: [" + numstr(b.dp_min) + ", " +
                   numstr(b.dp_max) + "]");
    }
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  c.finish();
}

TEST_CASE("criterion 8: feeder saturation nonlinearity") {
  Criterion c(8,
              "with the feeder head saturated by fixed generation, the upward "
              "gain from multiplier 4->5 stays under 10% of the 0->1 gain and "
              "downward flexibility is non-monotone");
  try {
    std::vector<double> up, dn;
    for (int m = 0; m <= 5; ++m) {
      const ScenarioFrame f = saturating_feeder_frame(static_cast<double>(m));
      const DeviationBounds b = max_deviation(f, 0, 2);
      up.push_back(b.dp_max);
      dn.push_back(b.dp_min);
    }
    const double expected_up[6] = {0.0, 0.12, 0.24, 0.36, 0.45, 0.45};
    const double expected_dn[6] = {-0.45, -0.53, -0.61, -0.64, -0.52, -0.40};
    for (int m = 0; m <= 5; ++m) {
      c.expect(std::abs(up[static_cast<std::size_t>(m)] - expected_up[m]) <= 1e-6,
               "m=" + std::to_string(m) + ": dp_max " +
                   numstr(up[static_cast<std::size_t>(m)]) + " expected " +
                   numstr(expected_up[m]));
      c.expect(std::abs(dn[static_cast<std::size_t>(m)] - expected_dn[m]) <= 1e-6,
               "m=" + std::to_string(m) + ": dp_min " +
                   numstr(dn[static_cast<std::size_t>(m)]) + " expected " +
                   numstr(expected_dn[m]));
    }
    const double gain01 = up[1] - up[0];
    const double gain45 = up[5] - up[4];
    c.expect(gain45 < 0.1 * gain01, "upward gain 4->5 is " + numstr(gain45) +
                                        ", not under 10% of 0->1 gain " +
                                        numstr(gain01));
    c.expect(up[0] <= 1e-7,
             "saturated head line should block all upward dP, got " +
                 numstr(up[0]));
    c.expect(dn[3] < dn[0] - 1e-6 && dn[5] > dn[3] + 1e-6,
             "downward flexibility should deepen then recede: " +
                 numstr(dn[0]) + ", " + numstr(dn[3]) + ", " + numstr(dn[5]));
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  c.finish();
}

TEST_CASE("criterion 9: identification recovery") {
  Criterion c(9,
              "synthetic metering at 2% noise recovers pv capacity within 5% "
              "and heat-pump capacity within 10%; emitted sizes follow the "
              "p(-8) - p(15) anchor rule");
  try {
    const std::vector<oracle::SyntheticNode> nodes = {
        {"h1", 2.0, 0.0, 0.4}, {"h2", 1.0, 1.2, 0.6}, {"h3", 0.0, 0.8, 0.5}};
    const oracle::SyntheticDataset ds =
        oracle::synthetic_dataset(nodes, 40, 0.02, 20260816);

    TempDir tmp;
    {
      std::ofstream out(tmp.path / "weather.csv");
      out.precision(17);
      out << "timestamp,temp_c,irr_wm2\n";
      for (int t = 0; t < ds.weather.size(); ++t)
        out << format_timestamp(ds.weather.t[static_cast<std::size_t>(t)])
            << ',' << ds.weather.temp_c[static_cast<std::size_t>(t)] << ','
            << ds.weather.irr_wm2[static_cast<std::size_t>(t)] << '\n';
    }
    {
      std::ofstream out(tmp.path / "measurements.csv");
      out.precision(17);
      out << "timestamp,node_id,p_net_mw\n";
      for (int t = 0; t < ds.weather.size(); ++t)
        for (const auto& [node, series] : ds.measured.node_p_mw)
          out << format_timestamp(ds.weather.t[static_cast<std::size_t>(t)])
              << ',' << node << ',' << series[static_cast<std::size_t>(t)]
              << '\n';
    }

    app::ScenarioConfig cfg;
    cfg.weather_path = (tmp.path / "weather.csv").string();
    cfg.measurements_path = (tmp.path / "measurements.csv").string();
    cfg.total_pv_capacity_mw = 3.0;
    cfg.out_dir = (tmp.path / "out").string();
    const app::RunResult res = app::run_identify(cfg);

    const nlohmann::json doc = nlohmann::json::parse(slurp(res.files.at(0)));
    std::map<std::string, nlohmann::json> by_node;
    for (const auto& jn : doc.at("nodes"))
      by_node[jn.at("node").get<std::string>()] = jn;

    auto rel_check = [&](const std::string& node, const char* key,
                         double truth, double tol) {
      const double est = by_node.at(node).at(key).get<double>();
      c.expect(std::abs(est - truth) <= tol * truth,
               node + " " + key + " " + numstr(est) + " vs true " +
                   numstr(truth) + " (tolerance " + numstr(tol * 100.0) + "%)");
    };
    rel_check("h1", "pv_capacity_mw", 2.0, 0.05);
    rel_check("h2", "pv_capacity_mw", 1.0, 0.05);
    rel_check("h2", "hp_capacity_mw", 1.2, 0.10);
    rel_check("h3", "hp_capacity_mw", 0.8, 0.10);
    c.expect(by_node.at("h3").at("pv_capacity_mw").get<double>() <= 1e-12,
             "h3 has no pv but got " +
                 numstr(by_node.at("h3").at("pv_capacity_mw").get<double>()));
    c.expect(by_node.at("h1").at("hp_capacity_mw").get<double>() <= 1e-12,
             "h1 has no heat pump but got " +
                 numstr(by_node.at("h1").at("hp_capacity_mw").get<double>()));

    for (const auto& [name, jn] : by_node) {
      if (!jn.contains("hp_coefficients")) continue;
      const auto& co = jn.at("hp_coefficients");
      const double a = co.at(0).get<double>();
      const double b = co.at(1).get<double>();
      const double q = co.at(2).get<double>();
      const auto poly_at = [&](double t) { return a + b * t + q * t * t; };
      const double anchored = std::max(0.0, poly_at(-8.0) - poly_at(15.0));
      const double emitted = jn.at("hp_capacity_mw").get<double>();
      if (jn.at("hp_fit").at("significant").get<bool>()) {
        c.expect(std::abs(emitted - anchored) <= 1e-9,
                 name + ": emitted capacity " + numstr(emitted) +
                     " breaks the anchor rule value " + numstr(anchored));
      } else {
        c.expect(emitted == 0.0,
                 name + ": insignificant fit must size to zero");
      }
    }

    HpFit fit;
    fit.a = 0.9;
    fit.b = -0.04;
    fit.c = 0.0005;
    const auto poly_at = [&](double t) {
      return fit.a + fit.b * t + fit.c * t * t;
    };
    c.expect(hp_capacity_from_fit(fit) ==
                 std::max(0.0, poly_at(-8.0) - poly_at(15.0)),
             "anchor rule must evaluate p(-8) - p(15) exactly");
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  c.finish();
}

TEST_CASE("criterion 10: deterministic outputs") {
  Criterion c(10,
              "repeated cli runs on fixed inputs produce byte-identical "
              "output files");
  try {
    auto run = [&](const std::string& verb, const std::string& config,
                   const TempDir& scratch, const std::filesystem::path& out) {
      const std::string cmd =
          kCliPath + " " + verb + " --config " + kDataDir + "/" + config +
          " --out " + out.string() + " > " +
          (scratch.path / "stdout.txt").string() + " 2> " +
          (scratch.path / "stderr.txt").string();
      return WEXITSTATUS(std::system(cmd.c_str()));
    };
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"single", "config_single.json"}, {"identify", "config_identify.json"}};
    for (const auto& [verb, config] : cases) {
      TempDir scratch;
      const std::filesystem::path out_a = scratch.path / "a";
      const std::filesystem::path out_b = scratch.path / "b";
      const int rc_a = run(verb, config, scratch, out_a);
      const int rc_b = run(verb, config, scratch, out_b);
      c.expect(rc_a == 0 && rc_b == 0,
               verb + ": exit codes " + std::to_string(rc_a) + " and " +
                   std::to_string(rc_b));
      if (rc_a != 0 || rc_b != 0) continue;

      std::vector<std::string> names_a, names_b;
      for (const auto& e : std::filesystem::directory_iterator(out_a))
        names_a.push_back(e.path().filename().string());
      for (const auto& e : std::filesystem::directory_iterator(out_b))
        names_b.push_back(e.path().filename().string());
      std::sort(names_a.begin(), names_a.end());
      std::sort(names_b.begin(), names_b.end());
      c.expect(!names_a.empty() && names_a == names_b,
               verb + ": the two runs emitted different file sets");
      if (names_a != names_b) continue;
      for (const std::string& name : names_a)
        c.expect(slurp((out_a / name).string()) ==
                     slurp((out_b / name).string()),
                 verb + ": " + name + " differs between runs");
    }
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  c.finish();
}
