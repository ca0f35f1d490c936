#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/csv.hpp"

namespace daytrip {

struct NetworkNode {
  std::string id;
  Point pos;
};

struct NetworkLink {
  std::string id;
  int from_node = -1;  // index into Network::nodes, -1 when dangling
  int to_node = -1;
  double length = 0.0;          // m
  double freespeed = 0.0;       // m/s
  double flow_capacity = 0.0;   // vehicles/hour
  double storage_lanes = 1.0;
  std::uint8_t allowed_modes = 0;  // bit per Mode

  bool allows(Mode m) const { return (allowed_modes >> static_cast<int>(m)) & 1u; }
};

struct Network {
  std::vector<NetworkNode> nodes;
  std::vector<NetworkLink> links;
  std::unordered_map<std::string, int> node_index;
  std::unordered_map<std::string, int> link_index;
  std::vector<std::vector<int>> out_links;  // node index -> outgoing link indices

  Point bbox_min{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Point bbox_max{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};

  Point link_midpoint(int link) const {
    const NetworkLink& l = links[link];
    if (l.from_node < 0 || l.to_node < 0) return Point{};
    const Point& a = nodes[l.from_node].pos;
    const Point& b = nodes[l.to_node].pos;
    return Point{(a.x + b.x) * 0.5, (a.y + b.y) * 0.5};
  }

  // Travel-time-free anchor for facilities and stops: closest link midpoint
  // among links that allow the given mode.
  int nearest_link(const Point& p, Mode m = Mode::car) const {
    int best = -1;
    double best_d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (!links[i].allows(m)) continue;
      if (links[i].from_node < 0 || links[i].to_node < 0) continue;
      double d = euclidean(p, link_midpoint(static_cast<int>(i)));
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  void rebuild_adjacency() {
    out_links.assign(nodes.size(), {});
    for (std::size_t i = 0; i < links.size(); ++i)
      if (links[i].from_node >= 0)
        out_links[links[i].from_node].push_back(static_cast<int>(i));
    for (const NetworkNode& n : nodes) {
      bbox_min.x = std::min(bbox_min.x, n.pos.x);
      bbox_min.y = std::min(bbox_min.y, n.pos.y);
      bbox_max.x = std::max(bbox_max.x, n.pos.x);
      bbox_max.y = std::max(bbox_max.y, n.pos.y);
    }
  }
};

struct TransitStop {
  std::string stop_id;
  std::string link_id;
  int link = -1;                 // -1 when the link is unknown (validation finding)
  double arrival_offset = 0.0;   // s after route departure
  double departure_offset = 0.0;
};

struct TransitRoute {
  std::string id;
  std::vector<TransitStop> stops;
  std::vector<Time> departures;  // seconds from midnight, sorted
  int seats = 9999;              // per-route vehicle capacity
};

struct TransitSchedule {
  std::vector<TransitRoute> routes;
  std::unordered_map<std::string, int> route_index;
};

struct BuildingRecord {
  std::string id;
  double footprint_area = 0.0;  // m^2
  int levels = 1;
  Point centroid;
  bool has_address = false;
  std::vector<std::string> tags;
  std::string zone_id;
};

struct Facility {
  std::string id;
  Point location;
  FacilityTypeSet types;
  int residence_slots = 0;  // meaningful only when types contains residence
  std::string zone_id;
  int link = -1;  // nearest car link, anchor for network legs
};

struct Charger {
  std::string id;
  std::string link_id;
  int link = -1;
  int plugs = 1;
};

// ---------------------------------------------------------------------------
// Building pipeline

inline std::vector<BuildingRecord> filter_buildings(const std::vector<BuildingRecord>& records,
                                                    double min_area, double max_area) {
  if (!(min_area < max_area)) throw Error("filter_buildings: min_area must be < max_area");
  std::vector<BuildingRecord> out;
  out.reserve(records.size());
  for (const BuildingRecord& r : records)
    if (r.has_address && r.footprint_area >= min_area && r.footprint_area <= max_area)
      out.push_back(r);
  return out;
}

inline FacilityType facility_type_from_tag(const std::string& tag) {
  if (tag == "residential" || tag == "residence") return FacilityType::residence;
  if (auto t = parse_facility_type(tag)) return *t;
  return FacilityType::other;
}

inline Facility classify_building(const BuildingRecord& record, double avg_living_area) {
  Facility f;
  f.id = record.id;
  f.location = record.centroid;
  f.zone_id = record.zone_id;
  for (const std::string& tag : record.tags) f.types.insert(facility_type_from_tag(tag));
  if (record.tags.empty()) f.types.insert(FacilityType::residence);
  if (f.types.contains(FacilityType::residence)) {
    f.residence_slots = static_cast<int>(std::max(
        1.0, std::floor(record.footprint_area * record.levels / avg_living_area)));
  }
  return f;
}

inline int residence_slots(double area, int levels, double avg_living_area) {
  if (area <= 0 || levels < 1 || avg_living_area <= 0)
    throw Error("residence_slots: inputs must be positive");
  return static_cast<int>(std::max(1.0, std::floor(area * levels / avg_living_area)));
}

// ---------------------------------------------------------------------------
// Loaders. Structural problems throw with file:line; referential problems are
// left for validate_scenario to report.

inline std::uint8_t parse_mode_set(const std::string& s) {
  std::uint8_t bits = 0;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    if (auto m = parse_mode(cur)) bits |= static_cast<std::uint8_t>(1u << static_cast<int>(*m));
    cur.clear();
  };
  for (char c : s) {
    if (c == '|' || c == ';' || c == ' ') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return bits;
}

inline Network load_network(const std::string& nodes_path, const std::string& links_path) {
  Network net;
  {
    CsvReader reader(nodes_path);
    reader.for_each([&](const CsvRow& row) {
      NetworkNode n;
      n.id = row.get("node_id");
      n.pos = Point{row.get_double("x"), row.get_double("y")};
      if (net.node_index.count(n.id))
        throw Error(nodes_path + ":" + std::to_string(row.line_number()) +
                    ": duplicate node_id " + n.id);
      net.node_index[n.id] = static_cast<int>(net.nodes.size());
      net.nodes.push_back(std::move(n));
    });
  }
  {
    CsvReader reader(links_path);
    reader.for_each([&](const CsvRow& row) {
      NetworkLink l;
      l.id = row.get("link_id");
      l.length = row.get_double("length");
      l.freespeed = row.get_double("freespeed");
      l.flow_capacity = row.get_double("flow_capacity");
      l.storage_lanes = row.get_double("lanes");
      l.allowed_modes = parse_mode_set(row.get("modes"));
      if (l.length <= 0 || l.freespeed <= 0 || l.flow_capacity <= 0 || l.storage_lanes <= 0)
        throw Error(links_path + ":" + std::to_string(row.line_number()) +
                    ": length, freespeed, flow_capacity and lanes must be positive");
      auto from = net.node_index.find(row.get("from_node"));
      auto to = net.node_index.find(row.get("to_node"));
      l.from_node = from == net.node_index.end() ? -1 : from->second;
      l.to_node = to == net.node_index.end() ? -1 : to->second;
      if (net.link_index.count(l.id))
        throw Error(links_path + ":" + std::to_string(row.line_number()) +
                    ": duplicate link_id " + l.id);
      net.link_index[l.id] = static_cast<int>(net.links.size());
      net.links.push_back(std::move(l));
    });
  }
  net.rebuild_adjacency();
  return net;
}

inline TransitSchedule load_transit(const std::string& routes_path,
                                    const std::string& departures_path, const Network& net) {
  TransitSchedule schedule;
  {
    CsvReader reader(routes_path);
    reader.for_each([&](const CsvRow& row) {
      const std::string route_id = row.get("route_id");
      int idx;
      auto it = schedule.route_index.find(route_id);
      if (it == schedule.route_index.end()) {
        idx = static_cast<int>(schedule.routes.size());
        schedule.route_index[route_id] = idx;
        schedule.routes.push_back(TransitRoute{route_id, {}, {}, 9999});
        if (row.has("seats")) schedule.routes[idx].seats = static_cast<int>(row.get_int("seats"));
      } else {
        idx = it->second;
      }
      TransitStop stop;
      stop.stop_id = row.get("stop_id");
      stop.link_id = row.get("link_id");
      auto link_it = net.link_index.find(stop.link_id);
      stop.link = link_it == net.link_index.end() ? -1 : link_it->second;
      stop.arrival_offset = row.get_double("arrival_offset");
      stop.departure_offset = row.get_double("departure_offset");
      TransitRoute& route = schedule.routes[idx];
      if (!route.stops.empty()) {
        const TransitStop& prev = route.stops.back();
        if (stop.arrival_offset < prev.departure_offset ||
            stop.departure_offset < stop.arrival_offset)
          throw Error(routes_path + ":" + std::to_string(row.line_number()) +
                      ": offsets must be non-decreasing along route " + route_id);
      }
      route.stops.push_back(std::move(stop));
    });
  }
  {
    CsvReader reader(departures_path);
    reader.for_each([&](const CsvRow& row) {
      const std::string route_id = row.get("route_id");
      auto it = schedule.route_index.find(route_id);
      if (it == schedule.route_index.end())
        throw Error(departures_path + ":" + std::to_string(row.line_number()) +
                    ": departure for unknown route " + route_id);
      schedule.routes[it->second].departures.push_back(row.get_double("time"));
    });
  }
  for (TransitRoute& r : schedule.routes) std::sort(r.departures.begin(), r.departures.end());
  return schedule;
}

inline std::vector<BuildingRecord> load_buildings(const std::string& path) {
  std::vector<BuildingRecord> out;
  CsvReader reader(path);
  reader.for_each([&](const CsvRow& row) {
    BuildingRecord b;
    b.id = row.get("building_id");
    b.footprint_area = row.get_double("area");
    b.levels = static_cast<int>(row.get_int("levels"));
    b.centroid = Point{row.get_double("x"), row.get_double("y")};
    b.has_address = row.get_bool("has_address");
    b.zone_id = row.get("zone_id");
    if (b.footprint_area <= 0)
      throw Error(path + ":" + std::to_string(row.line_number()) + ": area must be positive");
    if (b.levels < 1)
      throw Error(path + ":" + std::to_string(row.line_number()) + ": levels must be >= 1");
    std::string cur;
    for (char c : row.get("tags")) {
      if (c == '|' || c == ';') {
        if (!cur.empty()) b.tags.push_back(cur);
        cur.clear();
      } else if (c != ' ') {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) b.tags.push_back(cur);
    out.push_back(std::move(b));
  });
  return out;
}

struct FacilityParams {
  double min_area = 30.0;       // m^2
  double max_area = 350000.0;   // m^2
  double avg_living_area = 150.0;
};

inline std::vector<Facility> build_facilities(const std::vector<BuildingRecord>& records,
                                              const FacilityParams& params, const Network& net) {
  std::vector<Facility> out;
  for (const BuildingRecord& r : filter_buildings(records, params.min_area, params.max_area)) {
    Facility f = classify_building(r, params.avg_living_area);
    f.link = net.nearest_link(f.location, Mode::car);
    out.push_back(std::move(f));
  }
  return out;
}

inline std::vector<Charger> load_chargers(const std::string& path, const Network& net) {
  std::vector<Charger> out;
  CsvReader reader(path);
  reader.for_each([&](const CsvRow& row) {
    Charger c;
    c.id = row.get("charger_id");
    c.link_id = row.get("link_id");
    auto it = net.link_index.find(c.link_id);
    c.link = it == net.link_index.end() ? -1 : it->second;
    c.plugs = static_cast<int>(row.get_int("plugs"));
    if (c.plugs < 1)
      throw Error(path + ":" + std::to_string(row.line_number()) + ": plugs must be >= 1");
    out.push_back(std::move(c));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Scenario bundle + validation

struct Scenario {
  Network network;
  TransitSchedule transit;
  std::vector<Facility> facilities;
  std::vector<Charger> chargers;
  std::map<std::string, int> facility_index;  // facility id -> index

  void index_facilities() {
    facility_index.clear();
    for (size_t i = 0; i < facilities.size(); ++i)
      facility_index[facilities[i].id] = static_cast<int>(i);
  }

  const Facility& facility(const std::string& id) const {
    auto it = facility_index.find(id);
    if (it == facility_index.end()) throw Error("unknown facility " + id);
    return facilities[static_cast<size_t>(it->second)];
  }

  int facility_link(const std::string& id) const { return facility(id).link; }
};

struct ValidationIssue {
  std::string kind;    // dangling_node | missing_stop_link | facility_outside_bbox | ...
  std::string entity;  // offending id
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

inline ValidationReport validate_scenario(const Scenario& s) {
  ValidationReport report;
  for (const NetworkLink& l : s.network.links) {
    if (l.from_node < 0 || l.to_node < 0)
      report.issues.push_back({"dangling_node", l.id, "link " + l.id +
                               " references a node that does not exist"});
  }
  for (const TransitRoute& r : s.transit.routes) {
    for (const TransitStop& stop : r.stops) {
      if (stop.link < 0)
        report.issues.push_back({"missing_stop_link", stop.stop_id,
                                 "stop " + stop.stop_id + " on route " + r.id +
                                 " maps to missing link " + stop.link_id});
    }
  }
  for (const Facility& f : s.facilities) {
    if (f.location.x < s.network.bbox_min.x || f.location.x > s.network.bbox_max.x ||
        f.location.y < s.network.bbox_min.y || f.location.y > s.network.bbox_max.y)
      report.issues.push_back({"facility_outside_bbox", f.id,
                               "facility " + f.id + " lies outside the network bounding box"});
  }
  for (const Charger& c : s.chargers) {
    if (c.link < 0)
      report.issues.push_back({"missing_charger_link", c.id,
                               "charger " + c.id + " maps to missing link " + c.link_id});
  }
  return report;
}

}  // namespace daytrip
