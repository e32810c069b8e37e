#pragma once

// Radial distribution network model. All electrical quantities are per-unit
// on base_mva; physical units exist only at the file boundary.

#include <algorithm>
#include <fstream>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace flexregion {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BusKind { slack, load };

struct Bus {
  std::string id;
  BusKind kind = BusKind::load;
  double u_min = 0.95;  // p.u.
  double u_max = 1.05;  // p.u.
};

struct Line {
  std::string from;
  std::string to;
  double g = 0.0;     // series conductance, p.u.
  double b = 0.0;     // series susceptance, p.u. (negative for inductive lines)
  double b_sh = 0.0;  // total shunt susceptance, p.u., half attributed per terminal
  double s_max = 0.0; // apparent-power rating, p.u.
};

struct Violation {
  std::string element;
  std::string message;
};

class Network {
 public:
  Network() = default;
  Network(std::vector<Bus> buses, std::vector<Line> lines, double base_mva,
          double nominal_kv)
      : buses_(std::move(buses)),
        lines_(std::move(lines)),
        base_mva_(base_mva),
        nominal_kv_(nominal_kv) {
    for (std::size_t i = 0; i < buses_.size(); ++i) {
      index_.emplace(buses_[i].id, static_cast<int>(i));  // first occurrence wins
    }
  }

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  double base_mva() const { return base_mva_; }
  double nominal_kv() const { return nominal_kv_; }
  int n_buses() const { return static_cast<int>(buses_.size()); }

  std::optional<int> find_bus(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  int bus_index(const std::string& id) const {
    auto idx = find_bus(id);
    if (!idx) throw InputError("unknown bus '" + id + "'");
    return *idx;
  }

  int slack_index() const {
    for (std::size_t i = 0; i < buses_.size(); ++i) {
      if (buses_[i].kind == BusKind::slack) return static_cast<int>(i);
    }
    throw InputError("no slack bus");
  }

 private:
  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  double base_mva_ = 1.0;
  double nominal_kv_ = 1.0;
  std::unordered_map<std::string, int> index_;
};

inline std::vector<Violation> validate_network(const Network& net) {
  std::vector<Violation> out;
  const auto& buses = net.buses();
  const auto& lines = net.lines();

  if (!(net.base_mva() > 0.0)) out.push_back({"", "base_mva must be > 0"});
  if (!(net.nominal_kv() > 0.0)) out.push_back({"", "nominal_kv must be > 0"});

  std::unordered_map<std::string, int> seen;
  int slack_count = 0;
  for (const Bus& bus : buses) {
    if (++seen[bus.id] == 2) out.push_back({bus.id, "duplicate bus id"});
    if (bus.kind == BusKind::slack && ++slack_count > 1)
      out.push_back({bus.id, "multiple slack buses"});
    if (!(bus.u_min > 0.0)) out.push_back({bus.id, "u_min must be > 0"});
    if (!(bus.u_min < 1.0)) out.push_back({bus.id, "u_min >= 1"});
    if (!(bus.u_max > 1.0)) out.push_back({bus.id, "u_max <= 1"});
  }
  if (slack_count == 0) out.push_back({"", "no slack bus"});

  std::vector<std::pair<int, int>> pairs;
  std::vector<std::vector<int>> adj(buses.size());
  int line_no = 0;
  for (const Line& line : lines) {
    const std::string label = line.from + "-" + line.to;
    ++line_no;
    if (line.from == line.to) out.push_back({label, "line endpoints equal"});
    if (!(line.s_max > 0.0)) out.push_back({label, "s_max must be > 0"});
    auto i = net.find_bus(line.from);
    auto k = net.find_bus(line.to);
    if (!i) out.push_back({label, "unknown bus '" + line.from + "'"});
    if (!k) out.push_back({label, "unknown bus '" + line.to + "'"});
    if (i && k && *i != *k) {
      auto pr = std::minmax(*i, *k);
      if (std::find(pairs.begin(), pairs.end(),
                    std::make_pair(pr.first, pr.second)) != pairs.end()) {
        out.push_back({label, "parallel line"});
      }
      pairs.emplace_back(pr.first, pr.second);
      adj[static_cast<std::size_t>(*i)].push_back(*k);
      adj[static_cast<std::size_t>(*k)].push_back(*i);
    }
  }
  (void)line_no;

  if (!buses.empty() && slack_count >= 1) {
    std::vector<bool> reached(buses.size(), false);
    std::queue<int> bfs;
    int start = 0;
    for (std::size_t i = 0; i < buses.size(); ++i) {
      if (buses[i].kind == BusKind::slack) {
        start = static_cast<int>(i);
        break;
      }
    }
    bfs.push(start);
    reached[static_cast<std::size_t>(start)] = true;
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop();
      for (int w : adj[static_cast<std::size_t>(u)]) {
        if (!reached[static_cast<std::size_t>(w)]) {
          reached[static_cast<std::size_t>(w)] = true;
          bfs.push(w);
        }
      }
    }
    std::string missing;
    for (std::size_t i = 0; i < buses.size(); ++i) {
      if (!reached[i]) missing += (missing.empty() ? "" : ", ") + buses[i].id;
    }
    if (!missing.empty())
      out.push_back({missing, "disconnected from the slack bus"});
  }
  return out;
}

inline Network network_from_json(const nlohmann::json& doc) {
  try {
    std::vector<Bus> buses;
    for (const auto& jb : doc.at("buses")) {
      Bus bus;
      bus.id = jb.at("id").get<std::string>();
      const std::string kind = jb.at("kind").get<std::string>();
      if (kind == "slack") {
        bus.kind = BusKind::slack;
      } else if (kind == "load") {
        bus.kind = BusKind::load;
      } else {
        throw InputError("bus '" + bus.id + "': unknown kind '" + kind + "'");
      }
      bus.u_min = jb.value("u_min", 0.95);
      bus.u_max = jb.value("u_max", 1.05);
      buses.push_back(std::move(bus));
    }
    std::vector<Line> lines;
    for (const auto& jl : doc.at("lines")) {
      Line line;
      line.from = jl.at("from").get<std::string>();
      line.to = jl.at("to").get<std::string>();
      line.g = jl.value("g", 0.0);
      line.b = jl.at("b").get<double>();
      line.b_sh = jl.value("b_sh", 0.0);
      line.s_max = jl.at("s_max").get<double>();
      lines.push_back(std::move(line));
    }
    return Network(std::move(buses), std::move(lines),
                   doc.at("base_mva").get<double>(),
                   doc.at("nominal_kv").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("grid document: ") + e.what());
  }
}

inline Network load_network(const nlohmann::json& doc) {
  Network net = network_from_json(doc);
  const auto violations = validate_network(net);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid grid:";
    for (const auto& v : violations) {
      msg << " [" << v.element << "] " << v.message << ";";
    }
    throw InputError(msg.str());
  }
  return net;
}

inline Network load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open grid file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("grid file '" + path + "': " + e.what());
  }
  return load_network(doc);
}

// Canonical form: buses sorted by id, lines by (from, to); every field is
// written explicitly so serialize(load(doc)) is stable under round-trips.
inline nlohmann::json network_to_json(const Network& net) {
  nlohmann::json doc;
  doc["base_mva"] = net.base_mva();
  doc["nominal_kv"] = net.nominal_kv();
  std::vector<Bus> buses = net.buses();
  std::sort(buses.begin(), buses.end(),
            [](const Bus& a, const Bus& b) { return a.id < b.id; });
  doc["buses"] = nlohmann::json::array();
  for (const Bus& bus : buses) {
    doc["buses"].push_back({{"id", bus.id},
                            {"kind", bus.kind == BusKind::slack ? "slack" : "load"},
                            {"u_min", bus.u_min},
                            {"u_max", bus.u_max}});
  }
  std::vector<Line> lines = net.lines();
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  doc["lines"] = nlohmann::json::array();
  for (const Line& line : lines) {
    doc["lines"].push_back({{"from", line.from},
                            {"to", line.to},
                            {"g", line.g},
                            {"b", line.b},
                            {"b_sh", line.b_sh},
                            {"s_max", line.s_max}});
  }
  return doc;
}

}  // namespace flexregion
