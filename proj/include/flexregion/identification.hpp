#pragma once

// Capacity identification from historical net power and weather: PV shows up
// as a negative daylight regression slope against irradiance, heat pumps as
// rising nighttime consumption in cold weather. Works on metered
// consumption-positive MW.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>

#include "flexregion/timeseries.hpp"

namespace flexregion {

struct IdentifyOptions {
  double daylight_irr = 20.0;  // W/m², lower bound for PV samples
  double night_irr = 1.0;      // W/m², upper bound for HP samples
  int min_samples = 100;
  double p_threshold = 0.01;
  double r2_threshold = 0.1;
  double min_temp_range = 10.0;  // degC across night bins
  double t_full = -8.0;          // full heating power
  double t_zero = 15.0;          // no heating
};

struct FitDiagnostics {
  double r2 = 0.0;
  double f_stat = 0.0;
  double p_value = 1.0;
  int n = 0;
  bool significant = false;
};

struct PvFit {
  double slope = 0.0;  // MW per (W/m²); 0 when insignificant
  FitDiagnostics diag;
};

struct HpFit {
  double a = 0.0, b = 0.0, c = 0.0;  // p(T) = a + b T + c T^2
  FitDiagnostics diag;
};

struct NodeCapacityEstimate {
  std::string node;
  double pv_capacity_mw = 0.0;
  double hp_capacity_mw = 0.0;
  double pv_slope = 0.0;
  FitDiagnostics pv_diag;
  FitDiagnostics hp_diag;
};

namespace detail {

// Right tail of the F distribution; exact edge cases map to 0/1.
inline double f_p_value(double f, int d1, int d2) {
  if (d2 <= 0 || d1 <= 0) return 1.0;
  if (!(f > 0.0)) return 1.0;
  if (!std::isfinite(f)) return 0.0;
  boost::math::fisher_f dist(d1, d2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

inline FitDiagnostics regression_diagnostics(double r2, int n, int n_params,
                                             const IdentifyOptions& opt) {
  FitDiagnostics d;
  d.n = n;
  d.r2 = std::clamp(r2, 0.0, 1.0);
  const int d1 = n_params - 1;
  const int d2 = n - n_params;
  if (d.r2 >= 1.0) {
    d.f_stat = std::numeric_limits<double>::infinity();
    d.p_value = 0.0;
  } else {
    d.f_stat = (d.r2 / d1) / ((1.0 - d.r2) / std::max(d2, 1));
    d.p_value = f_p_value(d.f_stat, d1, d2);
  }
  d.significant = d.p_value < opt.p_threshold && d.r2 > opt.r2_threshold;
  return d;
}

inline const std::vector<double>& node_series(const MeasurementSeries& ms,
                                              const std::string& node) {
  auto it = ms.node_p_mw.find(node);
  if (it == ms.node_p_mw.end())
    throw InputError("no measurements for node '" + node + "'");
  return it->second;
}

}  // namespace detail

inline PvFit fit_pv_slope(const MeasurementSeries& ms, const std::string& node,
                          const IdentifyOptions& opt = {}) {
  const auto& p = detail::node_series(ms, node);
  std::vector<double> x, y;
  for (int t = 0; t < ms.size(); ++t) {
    const double irr = ms.weather.irr_wm2[static_cast<std::size_t>(t)];
    const double v = p[static_cast<std::size_t>(t)];
    if (is_gap(irr) || is_gap(v) || irr <= opt.daylight_irr) continue;
    x.push_back(irr);
    y.push_back(v);
  }
  const int n = static_cast<int>(x.size());
  if (n < opt.min_samples)
    throw InputError("node '" + node + "': insufficient daylight samples (" +
                     std::to_string(n) + ")");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += x[static_cast<std::size_t>(i)];
    my += y[static_cast<std::size_t>(i)];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = x[static_cast<std::size_t>(i)] - mx;
    const double dy = y[static_cast<std::size_t>(i)] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 1e-12 * n)
    throw InputError("node '" + node + "': zero variance in irradiance");
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? (slope * sxy) / syy : 0.0;
  PvFit fit;
  fit.diag = detail::regression_diagnostics(r2, n, 2, opt);
  fit.slope = fit.diag.significant ? slope : 0.0;
  return fit;
}

// Nighttime samples averaged into 1 degC temperature bins, then a quadratic
// least-squares fit of mean power against mean bin temperature.
inline HpFit fit_hp_polynomial(const MeasurementSeries& ms,
                               const std::string& node,
                               const IdentifyOptions& opt = {}) {
  const auto& p = detail::node_series(ms, node);
  std::map<int, std::pair<double, std::pair<double, int>>> bins;  // sum_p, sum_t, count
  int n_night = 0;
  for (int t = 0; t < ms.size(); ++t) {
    const double irr = ms.weather.irr_wm2[static_cast<std::size_t>(t)];
    const double temp = ms.weather.temp_c[static_cast<std::size_t>(t)];
    const double v = p[static_cast<std::size_t>(t)];
    if (is_gap(irr) || is_gap(temp) || is_gap(v) || irr > opt.night_irr) continue;
    ++n_night;
    auto& bin = bins[static_cast<int>(std::floor(temp))];
    bin.first += v;
    bin.second.first += temp;
    bin.second.second += 1;
  }
  if (n_night < opt.min_samples)
    throw InputError("node '" + node + "': insufficient night samples (" +
                     std::to_string(n_night) + ")");
  std::vector<double> bt, bp;
  for (const auto& [key, bin] : bins) {
    (void)key;
    bt.push_back(bin.second.first / bin.second.second);
    bp.push_back(bin.first / bin.second.second);
  }
  const int nb = static_cast<int>(bt.size());
  const double range =
      *std::max_element(bt.begin(), bt.end()) - *std::min_element(bt.begin(), bt.end());
  if (range < opt.min_temp_range)
    throw InputError("node '" + node + "': night temperature range " +
                     std::to_string(range) + " degC too narrow");

  Eigen::MatrixXd design(nb, 3);
  Eigen::VectorXd rhs(nb);
  for (int i = 0; i < nb; ++i) {
    const double t = bt[static_cast<std::size_t>(i)];
    design(i, 0) = 1.0;
    design(i, 1) = t;
    design(i, 2) = t * t;
    rhs(i) = bp[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs).eval();
  const Eigen::VectorXd fitted = design * coef;
  const double mean = rhs.mean();
  const double ss_tot = (rhs.array() - mean).square().sum();
  const double ss_res = (rhs - fitted).array().square().sum();
  const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;

  HpFit fit;
  fit.a = coef(0);
  fit.b = coef(1);
  fit.c = coef(2);
  fit.diag = detail::regression_diagnostics(r2, nb, 3, opt);
  return fit;
}

inline double hp_capacity_from_fit(const HpFit& fit, double t_full = -8.0,
                                   double t_zero = 15.0) {
  auto poly = [&](double t) { return fit.a + fit.b * t + fit.c * t * t; };
  return std::max(0.0, poly(t_full) - poly(t_zero));
}

// Distributes a known total over nodes in proportion to the magnitude of
// their significant negative slopes. The largest share absorbs the rounding
// residual so the column sums back to the total exactly.
inline std::map<std::string, double> allocate_pv_capacity(
    const std::map<std::string, PvFit>& fits, double total_mw) {
  if (total_mw < 0.0) throw InputError("total PV capacity must be >= 0");
  std::map<std::string, double> out;
  double denom = 0.0;
  for (const auto& [node, fit] : fits) {
    out[node] = 0.0;
    if (fit.diag.significant && fit.slope < 0.0) denom += -fit.slope;
  }
  if (total_mw == 0.0) return out;
  if (denom <= 0.0)
    throw InputError("no node shows a significant negative irradiance slope");
  std::string largest;
  double largest_share = -1.0;
  double assigned = 0.0;
  for (const auto& [node, fit] : fits) {
    if (!(fit.diag.significant && fit.slope < 0.0)) continue;
    const double share = total_mw * (-fit.slope) / denom;
    out[node] = share;
    assigned += share;
    if (share > largest_share) {
      largest_share = share;
      largest = node;
    }
  }
  out[largest] += total_mw - assigned;
  return out;
}

}  // namespace flexregion
