#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <flexregion/identification.hpp>

#include "oracles.hpp"

using namespace flexregion;

namespace {

// Uniform 15-min grid with hand-picked weather columns.
MeasurementSeries manual_series(const std::vector<double>& temp,
                                const std::vector<double>& irr,
                                const std::vector<double>& p) {
  REQUIRE(temp.size() == irr.size());
  REQUIRE(temp.size() == p.size());
  MeasurementSeries ms;
  const Timestamp start = parse_timestamp("2021-01-04T00:00");
  for (std::size_t i = 0; i < temp.size(); ++i) {
    ms.weather.t.push_back(Timestamp{start.minutes + 15 * static_cast<std::int64_t>(i)});
    ms.weather.temp_c.push_back(temp[i]);
    ms.weather.irr_wm2.push_back(irr[i]);
  }
  ms.node_p_mw["x"] = p;
  return ms;
}

}  // namespace

TEST_CASE("pv slope on noise-free data is exact") {
  // p = 3 - 0.0015 irr, irradiance ramping through daylight levels
  std::vector<double> temp, irr, p;
  for (int i = 0; i < 150; ++i) {
    const double x = 100.0 + 6.0 * i;
    temp.push_back(25.0);
    irr.push_back(x);
    p.push_back(3.0 - 0.0015 * x);
  }
  const MeasurementSeries ms = manual_series(temp, irr, p);
  const PvFit fit = fit_pv_slope(ms, "x");
  CHECK(fit.slope == Catch::Approx(-0.0015).margin(1e-12));
  CHECK(fit.diag.n == 150);
  CHECK(fit.diag.r2 > 0.999999);
  CHECK(fit.diag.p_value < 1e-10);
  CHECK(fit.diag.significant);
}

TEST_CASE("pv slope ignores gaps and night samples") {
  std::vector<double> temp, irr, p;
  for (int i = 0; i < 150; ++i) {
    const double x = 100.0 + 6.0 * i;
    temp.push_back(25.0);
    irr.push_back(x);
    p.push_back(3.0 - 0.002 * x);
  }
  // poison a few points; they must fall out of the sample, not skew it
  irr[3] = series_gap();
  p[7] = series_gap();
  irr[11] = 5.0;  // dusk, below the daylight bound
  p[11] = 1e6;
  MeasurementSeries ms = manual_series(temp, irr, p);
  const PvFit fit = fit_pv_slope(ms, "x");
  CHECK(fit.slope == Catch::Approx(-0.002).margin(1e-12));
  CHECK(fit.diag.n == 147);
}

TEST_CASE("pv slope error paths") {
  SECTION("unknown node") {
    const auto data = oracle::synthetic_dataset({{"a", 1.0, 0.0, 1.0}}, 2);
    CHECK_THROWS_WITH(fit_pv_slope(data.measured, "ghost"),
                      Catch::Matchers::ContainsSubstring("no measurements for node"));
  }
  SECTION("insufficient daylight samples") {
    const auto data = oracle::synthetic_dataset({{"a", 1.0, 0.0, 1.0}}, 1);
    CHECK_THROWS_WITH(fit_pv_slope(data.measured, "a"),
                      Catch::Matchers::ContainsSubstring("insufficient daylight samples"));
  }
  SECTION("zero variance in irradiance") {
    std::vector<double> temp(120, 20.0), irr(120, 500.0), p(120, 1.0);
    const MeasurementSeries ms = manual_series(temp, irr, p);
    CHECK_THROWS_WITH(fit_pv_slope(ms, "x"),
                      Catch::Matchers::ContainsSubstring("zero variance in irradiance"));
  }
}

TEST_CASE("hp quadratic on noise-free bins is exact") {
  // one distinct temperature per bin so bin means stay on the polynomial
  std::vector<double> temp, irr, p;
  for (int i = 0; i < 105; ++i) {
    const double t = -10.0 + (i % 21);
    temp.push_back(t);
    irr.push_back(0.0);
    p.push_back(2.0 - 0.08 * t + 0.002 * t * t);
  }
  const MeasurementSeries ms = manual_series(temp, irr, p);
  const HpFit fit = fit_hp_polynomial(ms, "x");
  CHECK(fit.a == Catch::Approx(2.0).margin(1e-9));
  CHECK(fit.b == Catch::Approx(-0.08).margin(1e-10));
  CHECK(fit.c == Catch::Approx(0.002).margin(1e-11));
  CHECK(fit.diag.significant);
  // p(-8) - p(15) on the fitted polynomial
  CHECK(hp_capacity_from_fit(fit) == Catch::Approx(1.518).margin(1e-8));
}

TEST_CASE("hp fit error paths") {
  SECTION("no night samples") {
    std::vector<double> temp(120, 20.0), irr(120, 500.0), p(120, 1.0);
    const MeasurementSeries ms = manual_series(temp, irr, p);
    CHECK_THROWS_WITH(fit_hp_polynomial(ms, "x"),
                      Catch::Matchers::ContainsSubstring("insufficient night samples"));
  }
  SECTION("narrow temperature range") {
    std::vector<double> temp, irr(120, 0.0), p(120, 1.0);
    for (int i = 0; i < 120; ++i) temp.push_back(4.0 + 0.01 * (i % 3));
    const MeasurementSeries ms = manual_series(temp, irr, p);
    CHECK_THROWS_WITH(fit_hp_polynomial(ms, "x"),
                      Catch::Matchers::ContainsSubstring("temperature range"));
  }
}

TEST_CASE("hp capacity anchors at the design temperatures") {
  HpFit fit;
  fit.a = 0.5;
  fit.b = -0.1;
  fit.c = 0.0;
  // p(-8) = 1.3, p(15) = -1.0
  CHECK(hp_capacity_from_fit(fit) == Catch::Approx(2.3).margin(1e-12));
  fit.b = 0.1;  // consumption falls with cold: no heat pump
  CHECK(hp_capacity_from_fit(fit) == 0.0);
}

TEST_CASE("capacity allocation splits the known total by slope magnitude") {
  std::map<std::string, PvFit> fits;
  auto make = [](double slope, bool sig) {
    PvFit f;
    f.slope = slope;
    f.diag.significant = sig;
    return f;
  };
  fits["a"] = make(-0.002, true);
  fits["b"] = make(-0.001, true);
  fits["c"] = make(-0.005, false);  // insignificant: excluded
  fits["d"] = make(0.003, true);    // positive slope: excluded

  const auto alloc = allocate_pv_capacity(fits, 6.0);
  CHECK(alloc.at("a") == Catch::Approx(4.0).margin(1e-12));
  CHECK(alloc.at("b") == Catch::Approx(2.0).margin(1e-12));
  CHECK(alloc.at("c") == 0.0);
  CHECK(alloc.at("d") == 0.0);
  double sum = 0.0;
  for (const auto& [node, mw] : alloc) sum += mw;
  CHECK(sum == 6.0);  // largest share absorbs the residual exactly

  SECTION("zero total allocates nothing") {
    const auto zero = allocate_pv_capacity(fits, 0.0);
    for (const auto& [node, mw] : zero) CHECK(mw == 0.0);
  }
  SECTION("no usable slope") {
    std::map<std::string, PvFit> bad;
    bad["a"] = make(0.002, true);
    bad["b"] = make(-0.001, false);
    CHECK_THROWS_WITH(allocate_pv_capacity(bad, 1.0),
                      Catch::Matchers::ContainsSubstring("significant negative"));
  }
  SECTION("negative total") {
    CHECK_THROWS_AS(allocate_pv_capacity(fits, -1.0), InputError);
  }
}

TEST_CASE("synthetic fleet is recovered within the advertised tolerances") {
  // 40 winter days, 2% meter noise; true capacities below
  const std::vector<oracle::SyntheticNode> nodes = {
      {"n1", 2.0, 0.0, 1.0},  // PV only
      {"n2", 1.0, 1.5, 1.2},  // PV and a heat pump
      {"n3", 0.0, 0.8, 0.9},  // heat pump only
      {"n4", 0.0, 0.0, 1.1},  // plain load
  };
  const auto data = oracle::synthetic_dataset(nodes, 40, 0.02);

  std::map<std::string, PvFit> pv;
  for (const auto& n : nodes) pv[n.name] = fit_pv_slope(data.measured, n.name);

  SECTION("pv shares within 5 percent of truth") {
    const auto alloc = allocate_pv_capacity(pv, 3.0);
    CHECK(alloc.at("n1") == Catch::Approx(2.0).epsilon(0.05));
    CHECK(alloc.at("n2") == Catch::Approx(1.0).epsilon(0.05));
    CHECK(alloc.at("n3") == 0.0);
    CHECK(alloc.at("n4") == 0.0);
  }

  SECTION("pv-free nodes never show a significant negative slope") {
    for (const std::string name : {"n3", "n4"}) {
      const PvFit& f = pv.at(name);
      CHECK((!f.diag.significant || f.slope >= 0.0));
    }
  }

  SECTION("hp capacities within 10 percent of truth") {
    const HpFit f2 = fit_hp_polynomial(data.measured, "n2");
    const HpFit f3 = fit_hp_polynomial(data.measured, "n3");
    REQUIRE(f2.diag.significant);
    REQUIRE(f3.diag.significant);
    CHECK(hp_capacity_from_fit(f2) == Catch::Approx(1.5).epsilon(0.10));
    CHECK(hp_capacity_from_fit(f3) == Catch::Approx(0.8).epsilon(0.10));
  }

  SECTION("hp-free nodes stay below the noise floor after gating") {
    for (const std::string name : {"n1", "n4"}) {
      const HpFit f = fit_hp_polynomial(data.measured, name);
      const double gated = f.diag.significant ? hp_capacity_from_fit(f) : 0.0;
      CHECK(gated < 0.2);
    }
  }
}
