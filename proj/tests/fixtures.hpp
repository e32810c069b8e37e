#pragma once

// Shared toy instances. toy2: two buses, one lossless line. The widened
// voltage band keeps the storage polygon the only binding constraint, so
// expected regions follow from arithmetic alone.

#include <string>
#include <vector>

#include <flexregion/baseline.hpp>

namespace fixtures {

inline flexregion::Network toy2(double u_min = 0.8, double u_max = 1.2,
                                double s_max = 5.0) {
  flexregion::Bus pcc;
  pcc.id = "pcc";
  pcc.kind = flexregion::BusKind::slack;
  pcc.u_min = u_min;
  pcc.u_max = u_max;
  flexregion::Bus n1;
  n1.id = "n1";
  n1.kind = flexregion::BusKind::load;
  n1.u_min = u_min;
  n1.u_max = u_max;
  flexregion::Line line;
  line.from = "pcc";
  line.to = "n1";
  line.g = 0.0;
  line.b = -10.0;
  line.b_sh = 0.0;
  line.s_max = s_max;
  return flexregion::Network({pcc, n1}, {line}, 1.0, 1.0);
}

inline flexregion::BessDevice toy_bess() {
  flexregion::BessDevice bess;
  bess.bus = "n1";
  bess.s_max = 1.0;
  bess.capacity_c = 2.0;  // p.u. h
  bess.soc_init = 0.6;
  bess.soc_min = 0.4;
  bess.soc_max = 0.8;
  bess.n_poly = 12;
  return bess;
}

inline flexregion::WeatherSeries flat_weather(int steps, double temp_c = 20.0,
                                              double irr = 0.0,
                                              const std::string& start =
                                                  "2021-06-01T00:00") {
  flexregion::WeatherSeries w;
  const flexregion::Timestamp t0 = flexregion::parse_timestamp(start);
  for (int t = 0; t < steps; ++t) {
    w.t.push_back(flexregion::Timestamp{t0.minutes + 15LL * t});
    w.temp_c.push_back(temp_c);
    w.irr_wm2.push_back(irr);
  }
  return w;
}

// Storage-only frame: zero baselines everywhere, 15-min steps.
inline flexregion::ScenarioFrame toy2f_frame(int horizon = 8) {
  const flexregion::WeatherSeries w = flat_weather(horizon);
  flexregion::MeasurementSeries empty;
  empty.weather = w;
  return flexregion::build_frame(toy2(), {toy_bess()}, w, empty, 0.25, horizon);
}

}  // namespace fixtures
