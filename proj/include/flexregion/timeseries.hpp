#pragma once

// Timestamped measurement and weather series on a uniform grid. Gaps are
// kept as NaN and never interpolated; downstream consumers decide whether a
// window with gaps is usable.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "flexregion/grid.hpp"

namespace flexregion {

inline double series_gap() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_gap(double v) { return std::isnan(v); }

// Minute-resolution civil timestamp, no time zones.
struct Timestamp {
  std::int64_t minutes = 0;  // since 1970-01-01T00:00

  auto operator<=>(const Timestamp&) const = default;
};

namespace detail {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yr + (m <= 2));
}

}  // namespace detail

// Accepts "YYYY-MM-DDTHH:MM" with 'T' or ' ' as the separator; seconds, if
// present, must be ":00".
inline Timestamp parse_timestamp(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0;
  const int got = std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo,
                              &d, &sep, &h, &mi, &s);
  if (got < 6 || (sep != 'T' && sep != ' ') || mo < 1 || mo > 12 || d < 1 ||
      d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || (got == 7 && s != 0))
    throw InputError("bad timestamp '" + text + "'");
  Timestamp ts;
  ts.minutes = detail::days_from_civil(y, mo, d) * 1440 + h * 60 + mi;
  return ts;
}

inline std::string format_timestamp(Timestamp ts) {
  std::int64_t days = ts.minutes / 1440;
  int rem = static_cast<int>(ts.minutes % 1440);
  if (rem < 0) {
    rem += 1440;
    --days;
  }
  int y, m, d;
  detail::civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d", y, m, d, rem / 60,
                rem % 60);
  return buf;
}

inline std::string timestamp_date(Timestamp ts) {
  return format_timestamp(ts).substr(0, 10);
}

inline int timestamp_hour(Timestamp ts) {
  const std::int64_t rem = ((ts.minutes % 1440) + 1440) % 1440;
  return static_cast<int>(rem / 60);
}

struct WeatherSeries {
  std::vector<Timestamp> t;
  std::vector<double> temp_c;
  std::vector<double> irr_wm2;

  int size() const { return static_cast<int>(t.size()); }
};

// Aligned measurement frame: the weather timeline is the master grid and
// per-node net active power hangs off it, kept as metered
// (consumption-positive, MW). Conversion to injections happens where a
// frame is built, not here.
struct MeasurementSeries {
  WeatherSeries weather;
  std::map<std::string, std::vector<double>> node_p_mw;

  int size() const { return weather.size(); }
};

namespace detail {

inline std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                                      std::size_t min_cols) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open csv file '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {  // column names are documentation, positions are the contract
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < min_cols)
      throw InputError("csv file '" + path + "': short row '" + line + "'");
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline double parse_number(const std::string& cell, const std::string& where) {
  if (cell.empty()) return series_gap();
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw InputError(where + ": bad number '" + cell + "'");
  }
}

}  // namespace detail

// timestamp,temp_c,irr_wm2 rows; must be sorted on a uniform grid.
inline WeatherSeries load_weather_csv(const std::string& path) {
  WeatherSeries ws;
  for (const auto& cells : detail::read_csv(path, 3)) {
    ws.t.push_back(parse_timestamp(cells[0]));
    ws.temp_c.push_back(detail::parse_number(cells[1], path));
    ws.irr_wm2.push_back(detail::parse_number(cells[2], path));
  }
  if (ws.t.empty()) throw InputError("weather file '" + path + "' is empty");
  for (std::size_t i = 1; i < ws.t.size(); ++i) {
    if (ws.t[i].minutes <= ws.t[i - 1].minutes)
      throw InputError("weather file '" + path + "': timestamps not increasing at " +
                       format_timestamp(ws.t[i]));
    if (i >= 2 && ws.t[i].minutes - ws.t[i - 1].minutes !=
                      ws.t[1].minutes - ws.t[0].minutes)
      throw InputError("weather file '" + path + "': non-uniform grid at " +
                       format_timestamp(ws.t[i]));
  }
  return ws;
}

// timestamp,node_id,p_net_mw rows, net power as metered. Timestamps not on
// the weather grid are an error; nodes missing a grid point keep a gap there.
inline MeasurementSeries load_measurement_csv(const std::string& path,
                                              const WeatherSeries& weather) {
  MeasurementSeries ms;
  ms.weather = weather;
  std::map<Timestamp, int> index;
  for (int i = 0; i < weather.size(); ++i) index[weather.t[static_cast<std::size_t>(i)]] = i;
  for (const auto& cells : detail::read_csv(path, 3)) {
    const Timestamp ts = parse_timestamp(cells[0]);
    auto it = index.find(ts);
    if (it == index.end())
      throw InputError("measurement file '" + path + "': timestamp " +
                       format_timestamp(ts) + " not on the weather grid");
    auto& series = ms.node_p_mw[cells[1]];
    if (series.empty())
      series.assign(static_cast<std::size_t>(weather.size()), series_gap());
    series[static_cast<std::size_t>(it->second)] = detail::parse_number(cells[2], path);
  }
  return ms;
}

}  // namespace flexregion
