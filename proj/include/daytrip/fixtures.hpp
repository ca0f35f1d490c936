#pragma once

// Deterministic synthetic inputs: a mini town exercising the whole pipeline
// and two small networks with closed-form behaviour. Everything is generated
// from a seed so the same inputs can be built in memory or written to disk.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/config.hpp"
#include "daytrip/csv.hpp"
#include "daytrip/diaries.hpp"
#include "daytrip/matching.hpp"
#include "daytrip/numfmt.hpp"
#include "daytrip/population.hpp"
#include "daytrip/rng.hpp"
#include "daytrip/scenario.hpp"

namespace daytrip::fixtures {

// --- small closed-form networks ---------------------------------------------------

struct LinkSpec {
  double length = 500;
  double freespeed = 10;
  double flow_capacity = 1e9;
  double lanes = 1e6;
};

// Chain o -> n1 -> n2 -> d with one facility at each end. Facility "o" is a
// residence on the first link, "d" sits on the last.
inline Scenario make_chain_scenario(const std::vector<LinkSpec>& specs) {
  Scenario s;
  Network& net = s.network;
  for (size_t i = 0; i <= specs.size(); ++i) {
    NetworkNode n;
    n.id = "n" + std::to_string(i);
    double x = 0;
    for (size_t k = 0; k < i; ++k) x += specs[k].length;
    n.pos = Point{x, 0};
    net.node_index[n.id] = static_cast<int>(net.nodes.size());
    net.nodes.push_back(n);
  }
  for (size_t i = 0; i < specs.size(); ++i) {
    NetworkLink l;
    l.id = "l" + std::to_string(i);
    l.from_node = static_cast<int>(i);
    l.to_node = static_cast<int>(i + 1);
    l.length = specs[i].length;
    l.freespeed = specs[i].freespeed;
    l.flow_capacity = specs[i].flow_capacity;
    l.storage_lanes = specs[i].lanes;
    l.allowed_modes = static_cast<std::uint8_t>((1u << static_cast<int>(Mode::car)) |
                                                (1u << static_cast<int>(Mode::ride)));
    net.link_index[l.id] = static_cast<int>(net.links.size());
    net.links.push_back(l);
  }
  net.rebuild_adjacency();

  Facility origin;
  origin.id = "o";
  origin.location = net.link_midpoint(0);
  origin.types.insert(FacilityType::residence);
  origin.residence_slots = 100000;
  origin.zone_id = "z0";
  origin.link = 0;
  Facility dest;
  dest.id = "d";
  dest.location = net.link_midpoint(static_cast<int>(specs.size()) - 1);
  dest.types.insert(FacilityType::other);
  dest.zone_id = "z0";
  dest.link = static_cast<int>(specs.size()) - 1;
  s.facilities = {origin, dest};
  s.index_facilities();
  return s;
}

struct TwoRouteToy {
  Scenario scenario;
  int fast_link = -1;
  int slow_link = -1;
  double fast_freeflow_s = 0;
  double slow_freeflow_s = 0;
  double fast_rate_veh_s = 0;  // effective bottleneck rate at factor 1.0
};

// Two parallel routes between a shared entry and exit link. The fast route is
// flow-constrained, the slow one is not; with n simultaneous departures the
// user equilibrium puts (rate * (slow - fast) + 1) vehicles on the fast link.
inline TwoRouteToy make_two_route_toy() {
  TwoRouteToy toy;
  Scenario& s = toy.scenario;
  Network& net = s.network;
  const char* ids[] = {"a", "b", "c", "d"};
  const double xs[] = {0, 500, 2500, 3000};
  for (int i = 0; i < 4; ++i) {
    NetworkNode n;
    n.id = ids[i];
    n.pos = Point{xs[i], 0};
    net.node_index[n.id] = i;
    net.nodes.push_back(n);
  }
  auto add = [&](const std::string& id, int from, int to, double len, double speed,
                 double cap) {
    NetworkLink l;
    l.id = id;
    l.from_node = from;
    l.to_node = to;
    l.length = len;
    l.freespeed = speed;
    l.flow_capacity = cap;
    l.storage_lanes = 1e6;
    l.allowed_modes = static_cast<std::uint8_t>((1u << static_cast<int>(Mode::car)) |
                                                (1u << static_cast<int>(Mode::ride)));
    net.link_index[id] = static_cast<int>(net.links.size());
    net.links.push_back(l);
  };
  add("entry", 0, 1, 500, 500, 1e9);
  add("fast", 1, 2, 2000, 100, 720);    // 20 s free flow, 0.2 veh/s at factor 1.0
  add("slow", 1, 2, 22000, 100, 1e9);   // 220 s free flow
  add("exit", 2, 3, 500, 500, 1e9);
  net.rebuild_adjacency();
  toy.fast_link = net.link_index["fast"];
  toy.slow_link = net.link_index["slow"];
  toy.fast_freeflow_s = 20;
  toy.slow_freeflow_s = 220;
  toy.fast_rate_veh_s = 720.0 / 3600.0;

  Facility origin;
  origin.id = "o";
  origin.location = net.link_midpoint(net.link_index["entry"]);
  origin.types.insert(FacilityType::residence);
  origin.residence_slots = 100000;
  origin.zone_id = "z0";
  origin.link = net.link_index["entry"];
  Facility dest;
  dest.id = "d";
  dest.location = net.link_midpoint(net.link_index["exit"]);
  dest.types.insert(FacilityType::office);
  dest.zone_id = "z0";
  dest.link = net.link_index["exit"];
  s.facilities = {origin, dest};
  s.index_facilities();
  return toy;
}

// --- mini town --------------------------------------------------------------------

struct MiniTown {
  Scenario scenario;
  std::vector<BuildingRecord> buildings;
  std::vector<MicroPerson> micro;
  std::vector<ZoneMarginals> marginals;
  ProjectionTargets projections;
  AttributeTables attributes;
  std::vector<DiaryRecord> diaries;
  Codebook codebook;
};

namespace fixture_detail {

constexpr int kGrid = 10;
constexpr double kSpacing = 500.0;

inline std::string node_id(int r, int c) {
  return "n" + std::to_string(r) + "_" + std::to_string(c);
}

inline std::string zone_of(const Point& p) {
  int col = p.x < (kGrid - 1) * kSpacing / 2 ? 0 : 1;
  int row = p.y < (kGrid - 1) * kSpacing / 2 ? 0 : 1;
  return "z" + std::to_string(row * 2 + col);
}

inline Network make_grid_network() {
  Network net;
  for (int r = 0; r < kGrid; ++r) {
    for (int c = 0; c < kGrid; ++c) {
      NetworkNode n;
      n.id = node_id(r, c);
      n.pos = Point{c * kSpacing, r * kSpacing};
      net.node_index[n.id] = static_cast<int>(net.nodes.size());
      net.nodes.push_back(n);
    }
  }
  auto add = [&](int r1, int c1, int r2, int c2) {
    NetworkLink l;
    l.id = node_id(r1, c1) + ">" + node_id(r2, c2);
    l.from_node = net.node_index[node_id(r1, c1)];
    l.to_node = net.node_index[node_id(r2, c2)];
    l.length = kSpacing;
    l.freespeed = 13.9;
    l.flow_capacity = 600;
    l.storage_lanes = 1;
    l.allowed_modes = static_cast<std::uint8_t>((1u << static_cast<int>(Mode::car)) |
                                                (1u << static_cast<int>(Mode::ride)) |
                                                (1u << static_cast<int>(Mode::pt)));
    net.link_index[l.id] = static_cast<int>(net.links.size());
    net.links.push_back(l);
  };
  for (int r = 0; r < kGrid; ++r) {
    for (int c = 0; c < kGrid; ++c) {
      if (c + 1 < kGrid) {
        add(r, c, r, c + 1);
        add(r, c + 1, r, c);
      }
      if (r + 1 < kGrid) {
        add(r, c, r + 1, c);
        add(r + 1, c, r, c);
      }
    }
  }
  net.rebuild_adjacency();
  return net;
}

inline TransitSchedule make_bus_routes(const Network& net) {
  TransitSchedule ts;
  auto build = [&](const std::string& id, const std::vector<std::pair<int, int>>& stop_nodes,
                   bool horizontal) {
    TransitRoute route;
    route.id = id;
    route.seats = 40;
    double offset = 0;
    for (size_t i = 0; i < stop_nodes.size(); ++i) {
      TransitStop stop;
      stop.stop_id = id + "_s" + std::to_string(i);
      auto [r, c] = stop_nodes[i];
      // anchor each stop on the link that arrives at its node along the route
      std::string link_id;
      if (i == 0) {
        auto [r2, c2] = stop_nodes[1];
        int nr = horizontal ? r : r + (r2 > r ? 1 : -1);
        int nc = horizontal ? c + (c2 > c ? 1 : -1) : c;
        link_id = node_id(r, c) + ">" + node_id(nr, nc);
      } else {
        auto [rp, cp] = stop_nodes[i - 1];
        int nr = horizontal ? r : (r > rp ? r - 1 : r + 1);
        int nc = horizontal ? (c > cp ? c - 1 : c + 1) : c;
        link_id = node_id(nr, nc) + ">" + node_id(r, c);
      }
      stop.link_id = link_id;
      auto it = net.link_index.find(link_id);
      stop.link = it == net.link_index.end() ? -1 : it->second;
      stop.arrival_offset = offset;
      stop.departure_offset = offset + 30;
      offset += 210;  // two 500 m blocks plus dwell
      route.stops.push_back(stop);
    }
    for (Time t = 6 * 3600; t <= 22 * 3600; t += 900) route.departures.push_back(t);
    ts.route_index[id] = static_cast<int>(ts.routes.size());
    ts.routes.push_back(std::move(route));
  };
  build("bus_ew", {{4, 0}, {4, 2}, {4, 4}, {4, 6}, {4, 8}}, true);
  build("bus_ns", {{0, 5}, {2, 5}, {4, 5}, {6, 5}, {8, 5}}, false);
  return ts;
}

struct TagProfile {
  const char* tag;
  double share;
  double min_area;
  double max_area;
  int max_levels;
};

constexpr TagProfile kTagProfiles[] = {
    {"residential", 0.70, 120, 900, 3},  {"shop", 0.06, 200, 2200, 2},
    {"office", 0.04, 300, 3000, 4},      {"industrial", 0.03, 500, 6000, 1},
    {"sustenance", 0.03, 120, 700, 1},   {"education", 0.03, 800, 5000, 2},
    {"healthcare", 0.02, 300, 4000, 3},  {"entertainment", 0.03, 300, 3000, 1},
    {"sport", 0.02, 500, 6000, 1},       {"civic", 0.02, 400, 4000, 2},
    {"financial", 0.01, 200, 1200, 2},   {"other", 0.01, 100, 1000, 1},
};

inline std::vector<BuildingRecord> make_buildings(std::uint64_t seed) {
  Rng rng(mix_seed(seed, "buildings"));
  std::vector<BuildingRecord> out;
  const int count = 620;
  for (int i = 0; i < count; ++i) {
    BuildingRecord b;
    b.id = "b" + std::to_string(i);
    b.centroid = Point{rng.uniform(100.0, (kGrid - 1) * kSpacing - 100.0),
                       rng.uniform(100.0, (kGrid - 1) * kSpacing - 100.0)};
    b.zone_id = zone_of(b.centroid);
    double u = rng.next_double();
    double acc = 0;
    const TagProfile* chosen = &kTagProfiles[0];
    for (const TagProfile& t : kTagProfiles) {
      acc += t.share;
      if (u < acc) {
        chosen = &t;
        break;
      }
    }
    b.tags = {chosen->tag};
    b.footprint_area = rng.uniform(chosen->min_area, chosen->max_area);
    b.levels = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(chosen->max_levels)));
    b.has_address = rng.next_double() > 0.03;
    // a few mixed-use buildings
    if (std::string(chosen->tag) == "shop" && rng.next_double() < 0.3)
      b.tags.push_back("office");
    out.push_back(std::move(b));
  }
  // degenerate rows that the area filter must drop
  BuildingRecord shed;
  shed.id = "b_shed";
  shed.footprint_area = 12;
  shed.levels = 1;
  shed.centroid = Point{200, 200};
  shed.has_address = true;
  shed.tags = {"residential"};
  shed.zone_id = zone_of(shed.centroid);
  out.push_back(shed);
  BuildingRecord mega;
  mega.id = "b_mega";
  mega.footprint_area = 420000;
  mega.levels = 1;
  mega.centroid = Point{2250, 2250};
  mega.has_address = true;
  mega.tags = {"industrial"};
  mega.zone_id = zone_of(mega.centroid);
  out.push_back(mega);
  return out;
}

inline std::vector<MicroPerson> make_micro(std::uint64_t seed) {
  Rng rng(mix_seed(seed, "micro"));
  std::vector<MicroPerson> out;
  std::int64_t id = 1;
  for (int ac = 0; ac < kNumAgeClasses; ++ac) {
    for (int sex = 0; sex <= 1; ++sex) {
      for (int k = 0; k < 5; ++k) {
        MicroPerson p;
        p.record_id = id++;
        p.age_class = ac;
        p.sex = sex;
        if (ac <= 2) {
          p.labour_force_status = 2;  // child / student
        } else if (ac == 3) {
          p.labour_force_status = rng.next_double() < 0.6 ? 2 : 1;
        } else if (ac < 13) {
          p.labour_force_status = rng.next_double() < 0.82 ? 1 : 0;
        } else {
          p.labour_force_status = rng.next_double() < 0.1 ? 1 : 0;
        }
        p.income_class = static_cast<int>(rng.next_below(5));
        p.qualification_class = static_cast<int>(rng.next_below(4));
        p.household_size_class = static_cast<int>(rng.next_below(5));
        p.children_present = p.household_size_class >= 2 && rng.next_double() < 0.6;
        p.household_type = static_cast<int>(rng.next_below(3));
        p.maintainer_flag = ac >= 4 && rng.next_double() < 0.55;
        out.push_back(p);
      }
    }
  }
  return out;
}

// Per-age-class expected weight; seniors are a thinner slice so the town lands
// near a tenth of the population at 65+.
inline double age_profile(int age_class) {
  if (age_class <= 2) return 0.8;
  if (age_class < 13) return 1.2;
  return 0.35;
}

}  // namespace fixture_detail

// Weekday diaries on a 5-minute grid, built from a handful of archetypes with
// jittered wake-up times, plus a few dirty records the cleaning stage drops.
inline std::vector<DiaryRecord> make_mini_town_diaries(std::uint64_t seed) {
  Rng rng(mix_seed(seed, "diaries"));
  std::vector<DiaryRecord> out;
  DiaryId next_id = 1;

  struct Ep {
    const char* loc;
    const char* act;
    const char* mode;
    Time dur;
  };
  auto emit = [&](const std::vector<Ep>& eps, int ac_lo, int ac_hi, int lfs, int lic_mode) {
    DiaryRecord d;
    d.id = next_id++;
    d.age_class = ac_lo + static_cast<int>(rng.next_below(
                              static_cast<std::uint64_t>(ac_hi - ac_lo + 1)));
    d.sex = static_cast<int>(rng.next_below(2));
    d.labour_force_status = lfs;
    d.income_class = static_cast<int>(rng.next_below(5));
    d.qualification_class = static_cast<int>(rng.next_below(4));
    d.household_size_class = static_cast<int>(rng.next_below(5));
    d.children_present = d.household_size_class >= 2 && rng.next_double() < 0.5;
    d.health = static_cast<int>(rng.next_below(3));
    d.has_license = lic_mode == 2 ? rng.next_double() < 0.5 : lic_mode == 1;
    d.day_type = 0;
    d.urban = true;
    double jitter = 300.0 * (static_cast<double>(rng.next_below(13)) - 6.0);
    Time t = 0;
    std::vector<Ep> list(eps);
    for (size_t i = 0; i < list.size(); ++i) {
      DiaryEpisode e;
      e.location_type = list[i].loc;
      e.activity_type = list[i].act;
      e.mode = list[i].mode ? list[i].mode : "";
      e.start = t;
      e.duration = list[i].dur;
      if (i == 0) e.duration += jitter;
      if (i + 1 == list.size()) e.duration = 86400.0 - t;
      t += e.duration;
      d.episodes.push_back(std::move(e));
    }
    out.push_back(std::move(d));
    return &out.back();
  };

  const std::vector<Ep> worker_car = {{"home", "rest", nullptr, 27000}, {"travel", "", "car", 1800},
                           {"work", "job", nullptr, 28800},  {"travel", "", "car", 1800},
                           {"shop", "shopping", nullptr, 3600}, {"travel", "", "car", 900},
                           {"home", "rest", nullptr, 22500}};
  const std::vector<Ep> worker_pt = {{"home", "rest", nullptr, 25200}, {"travel", "", "pt", 2400},
                          {"work", "job", nullptr, 30600},  {"travel", "", "pt", 2400},
                          {"home", "rest", nullptr, 5400},  {"travel", "", "walk", 900},
                          {"other", "culture", nullptr, 7200}, {"travel", "", "walk", 900},
                          {"home", "rest", nullptr, 11400}};
  const std::vector<Ep> worker_bike = {{"home", "rest", nullptr, 27000}, {"travel", "", "bike", 2400},
                            {"work", "job", nullptr, 30000},  {"travel", "", "bike", 2400},
                            {"home", "rest", nullptr, 24600}};
  const std::vector<Ep> student_pt = {{"home", "rest", nullptr, 28800},  {"travel", "", "pt", 1800},
                           {"school", "class", nullptr, 21600}, {"travel", "", "pt", 1800},
                           {"other", "sport", nullptr, 5400},  {"travel", "", "walk", 600},
                           {"home", "rest", nullptr, 26400}};
  const std::vector<Ep> retiree_walk = {{"home", "rest", nullptr, 32400}, {"travel", "", "walk", 1200},
                             {"shop", "shopping", nullptr, 4500}, {"travel", "", "walk", 1200},
                             {"home", "rest", nullptr, 12000}, {"travel", "", "walk", 900},
                             {"other", "visit", nullptr, 10800}, {"travel", "", "walk", 900},
                             {"home", "rest", nullptr, 22500}};
  const std::vector<Ep> retiree_car = {{"home", "rest", nullptr, 30600}, {"travel", "", "car", 900},
                            {"clinic", "checkup", nullptr, 3600}, {"travel", "", "car", 900},
                            {"shop", "shopping", nullptr, 2700}, {"travel", "", "car", 900},
                            {"home", "rest", nullptr, 46800}};
  const std::vector<Ep> errands_ride = {{"home", "rest", nullptr, 30000}, {"travel", "", "ride", 1200},
                             {"clinic", "checkup", nullptr, 3600}, {"travel", "", "ride", 1200},
                             {"restaurant", "eat", nullptr, 3600}, {"travel", "", "walk", 900},
                             {"shop", "shopping", nullptr, 1800}, {"travel", "", "ride", 1200},
                             {"home", "rest", nullptr, 42900}};
  const std::vector<Ep> escort_parent = {{"home", "rest", nullptr, 28200}, {"travel", "", "car", 900},
                              {"other", "escort", nullptr, 600}, {"travel", "", "car", 900},
                              {"home", "rest", nullptr, 12600}, {"travel", "", "car", 900},
                              {"other", "escort", nullptr, 600}, {"travel", "", "car", 900},
                              {"shop", "shopping", nullptr, 2700}, {"travel", "", "car", 900},
                              {"home", "rest", nullptr, 37200}};
  const std::vector<Ep> stay_home = {{"home", "rest", nullptr, 86400}};
  const std::vector<Ep> evening_social = {{"home", "rest", nullptr, 36000}, {"travel", "", "walk", 1500},
                               {"other", "visit", nullptr, 14400}, {"travel", "", "walk", 1500},
                               {"home", "rest", nullptr, 33000}};

  auto many = [&](int n, const std::vector<Ep>& eps, int lo, int hi, int lfs, int lic) {
    for (int i = 0; i < n; ++i) emit(eps, lo, hi, lfs, lic);
  };
  many(40, worker_car, 5, 12, 1, 1);
  many(15, worker_pt, 4, 11, 1, 2);
  many(8, worker_bike, 4, 9, 1, 2);
  many(18, student_pt, 3, 4, 2, 0);
  many(14, retiree_walk, 13, 17, 0, 0);
  many(12, retiree_car, 13, 16, 0, 1);
  many(10, errands_ride, 12, 17, 0, 0);
  many(10, escort_parent, 6, 9, 1, 1);
  many(18, stay_home, 13, 17, 0, 2);
  many(10, evening_social, 4, 12, 1, 2);

  // dirty records that cleaning must remove
  DiaryRecord* rural = emit(worker_car, 6, 10, 1, 1);
  rural->urban = false;
  DiaryRecord* saturday = emit(retiree_walk, 13, 16, 0, 0);
  saturday->day_type = 1;
  DiaryRecord* sunday = emit(evening_social, 5, 10, 1, 1);
  sunday->day_type = 2;
  DiaryRecord* lost = emit(worker_pt, 5, 9, 1, 0);
  lost->episodes[2].location_type = "missing";
  DiaryRecord* flyer = emit(worker_car, 6, 10, 1, 1);
  flyer->episodes[1].mode = "plane";
  DiaryRecord* roadtrip = emit(worker_car, 6, 10, 1, 1);
  roadtrip->episodes[1].duration = 5400;
  roadtrip->episodes[2].duration -= 3600;
  for (size_t i = 1; i < roadtrip->episodes.size(); ++i)
    roadtrip->episodes[i].start = roadtrip->episodes[i - 1].end();
  DiaryRecord* teleporter = emit(stay_home, 5, 9, 1, 1);
  teleporter->episodes[0].duration = 43200;
  DiaryEpisode wrk;
  wrk.location_type = "work";
  wrk.activity_type = "job";
  wrk.start = 43200;
  wrk.duration = 43200;
  teleporter->episodes.push_back(wrk);

  return out;
}

inline MiniTown make_mini_town(std::uint64_t seed = 7) {
  using namespace fixture_detail;
  MiniTown town;
  town.scenario.network = make_grid_network();
  town.scenario.transit = make_bus_routes(town.scenario.network);
  town.buildings = make_buildings(seed);
  town.scenario.facilities =
      build_facilities(town.buildings, FacilityParams{}, town.scenario.network);
  town.scenario.index_facilities();

  // chargers near the two transit corridors
  auto add_charger = [&](const std::string& id, int r, int c, int plugs) {
    Charger ch;
    ch.id = id;
    ch.link_id = node_id(r, c) + ">" + node_id(r, c + 1);
    ch.link = town.scenario.network.link_index.at(ch.link_id);
    ch.plugs = plugs;
    town.scenario.chargers.push_back(ch);
  };
  add_charger("ch0", 4, 4, 2);
  add_charger("ch1", 2, 2, 2);

  town.micro = make_micro(seed);

  // zone weights over the micro sample; every marginal table aggregates the
  // same weights so the attribute totals agree exactly
  Rng rng(mix_seed(seed, "marginals"));
  const char* attrs[] = {"age_class", "sex", "labour_force_status", "household_size_class"};
  std::map<std::pair<int, int>, double> projected;  // (age_class, sex) -> weighted count
  for (int z = 0; z < 4; ++z) {
    std::vector<double> w(town.micro.size());
    double total = 0;
    for (size_t i = 0; i < town.micro.size(); ++i) {
      w[i] = age_profile(town.micro[i].age_class) * rng.uniform(0.7, 1.3);
      total += w[i];
    }
    double scale = (480.0 + z * 15.0) / total;
    ZoneMarginals zm;
    zm.zone_id = "z" + std::to_string(z);
    for (size_t i = 0; i < town.micro.size(); ++i) {
      w[i] *= scale;
      projected[{town.micro[i].age_class, town.micro[i].sex}] += w[i];
      for (const char* attr : attrs) {
        int cat = micro_attr(town.micro[i], attr);
        auto& vec = zm.counts[attr];
        if (static_cast<int>(vec.size()) <= cat) vec.resize(cat + 1, 0.0);
        vec[cat] += w[i];
      }
    }
    town.marginals.push_back(std::move(zm));
  }
  for (const auto& [cell, count] : projected) {
    double growth = cell.first >= 13 ? 1.25 : 1.0;
    town.projections.cells[cell] = std::llround(count * growth);
  }

  // conditional attribute tables
  for (int ac = 0; ac < kNumAgeClasses; ++ac) {
    for (int sex = 0; sex <= 1; ++sex) {
      double poor = std::min(0.45, 0.04 + 0.022 * ac);
      double excellent = std::max(0.1, 0.55 - 0.02 * ac);
      town.attributes.tables["health"].rows[{ac, sex}] = {
          {"0", poor}, {"1", 1.0 - poor - excellent}, {"2", excellent}};
      double lic;
      if (ac <= 2) {
        lic = 0.0;
      } else if (ac == 3) {
        lic = 0.55;
      } else if (ac < 13) {
        lic = 0.87;
      } else {
        lic = std::max(0.25, 0.8 - 0.12 * (ac - 13));
      }
      if (sex == 0) lic = std::max(0.0, lic - 0.06);
      town.attributes.tables["license"].rows[{ac, sex}] = {
          {"1", lic}, {"0", 1.0 - lic}};
      auto pair_code = [](int a, int s) {
        return std::to_string(a) + ":" + std::to_string(s);
      };
      if (ac >= 4) {
        int partner_ac = std::max(0, ac - (sex == 1 ? 1 : 0));
        int child_ac = std::max(0, ac - 6);
        town.attributes.tables["household_member"].rows[{ac, sex}] = {
            {pair_code(partner_ac, 1 - sex), 0.55},
            {pair_code(std::max(0, ac - 1), 1 - sex), 0.1},
            {pair_code(child_ac, 0), 0.15},
            {pair_code(child_ac, 1), 0.15},
            {pair_code(ac, sex), 0.05},
        };
      }
    }
  }

  town.diaries = make_mini_town_diaries(seed);
  town.codebook = {
      {"age_class", true, 2.0},          {"sex", false, 1.0},
      {"labour_force_status", false, 1.5}, {"income_class", true, 1.0},
      {"qualification_class", true, 1.0}, {"household_size_class", true, 1.0},
      {"children_present", false, 1.0},  {"health", true, 1.0},
      {"has_license", false, 2.0},
  };
  return town;
}

// --- mini-town CSV emission --------------------------------------------------------

inline void write_mini_town(const MiniTown& town, const std::string& dir) {
  const Network& net = town.scenario.network;
  {
    CsvWriter w(dir + "/nodes.csv", {"node_id", "x", "y"});
    for (const auto& n : net.nodes) w.write_row({n.id, num(n.pos.x), num(n.pos.y)});
  }
  {
    CsvWriter w(dir + "/links.csv", {"link_id", "from_node", "to_node", "length", "freespeed",
                                     "flow_capacity", "lanes", "modes"});
    for (const auto& l : net.links) {
      std::string modes;
      for (Mode m : {Mode::car, Mode::ride, Mode::pt, Mode::walk, Mode::bike, Mode::amod}) {
        if (!l.allows(m)) continue;
        if (!modes.empty()) modes += '|';
        modes += mode_name(m);
      }
      w.write_row({l.id, net.nodes[l.from_node].id, net.nodes[l.to_node].id, num(l.length),
                   num(l.freespeed), num(l.flow_capacity), num(l.storage_lanes), modes});
    }
  }
  {
    CsvWriter w(dir + "/transit_routes.csv",
                {"route_id", "stop_id", "link_id", "arrival_offset", "departure_offset",
                 "seats"});
    for (const auto& r : town.scenario.transit.routes)
      for (const auto& s : r.stops)
        w.write_row({r.id, s.stop_id, s.link_id, num(s.arrival_offset),
                     num(s.departure_offset), std::to_string(r.seats)});
  }
  {
    CsvWriter w(dir + "/transit_departures.csv", {"route_id", "time"});
    for (const auto& r : town.scenario.transit.routes)
      for (Time t : r.departures) w.write_row({r.id, num(t)});
  }
  {
    CsvWriter w(dir + "/buildings.csv",
                {"building_id", "area", "levels", "x", "y", "has_address", "zone_id", "tags"});
    for (const auto& b : town.buildings) {
      std::string tags;
      for (const auto& t : b.tags) {
        if (!tags.empty()) tags += '|';
        tags += t;
      }
      w.write_row({b.id, num(b.footprint_area), std::to_string(b.levels), num(b.centroid.x),
                   num(b.centroid.y), b.has_address ? "1" : "0", b.zone_id, tags});
    }
  }
  {
    CsvWriter w(dir + "/chargers.csv", {"charger_id", "link_id", "plugs"});
    for (const auto& c : town.scenario.chargers)
      w.write_row({c.id, c.link_id, std::to_string(c.plugs)});
  }
  {
    CsvWriter w(dir + "/microsample.csv",
                {"record_id", "age_class", "sex", "labour_force_status", "income_class",
                 "qualification_class", "household_size_class", "children_present",
                 "household_type", "maintainer"});
    for (const auto& p : town.micro)
      w.write_row({std::to_string(p.record_id), std::to_string(p.age_class),
                   std::to_string(p.sex), std::to_string(p.labour_force_status),
                   std::to_string(p.income_class), std::to_string(p.qualification_class),
                   std::to_string(p.household_size_class), p.children_present ? "1" : "0",
                   std::to_string(p.household_type), p.maintainer_flag ? "1" : "0"});
  }
  {
    CsvWriter w(dir + "/marginals.csv", {"zone_id", "attribute", "category", "count"});
    for (const auto& z : town.marginals)
      for (const auto& [attr, counts] : z.counts)
        for (size_t cat = 0; cat < counts.size(); ++cat)
          w.write_row({z.zone_id, attr, std::to_string(cat), num(counts[cat])});
  }
  {
    CsvWriter w(dir + "/projections.csv", {"age_class", "sex", "count"});
    for (const auto& [cell, count] : town.projections.cells)
      w.write_row({std::to_string(cell.first), std::to_string(cell.second),
                   std::to_string(count)});
  }
  {
    CsvWriter w(dir + "/attributes.csv", {"table", "age_class", "sex", "value", "p"});
    for (const auto& [name, table] : town.attributes.tables)
      for (const auto& [cell, values] : table.rows)
        for (const auto& [value, p] : values)
          w.write_row({name, std::to_string(cell.first), std::to_string(cell.second), value,
                       num(p)});
  }
  {
    CsvWriter w(dir + "/diaries.csv",
                {"diary_id", "episode_index", "age_class", "sex", "labour_force_status",
                 "income_class", "qualification_class", "household_size_class",
                 "children_present", "health", "has_license", "day_type", "urban", "start",
                 "duration", "location_type", "activity_type", "mode"});
    for (const auto& d : town.diaries) {
      for (size_t i = 0; i < d.episodes.size(); ++i) {
        const auto& e = d.episodes[i];
        w.write_row({std::to_string(d.id), std::to_string(i), std::to_string(d.age_class),
                     std::to_string(d.sex), std::to_string(d.labour_force_status),
                     std::to_string(d.income_class), std::to_string(d.qualification_class),
                     std::to_string(d.household_size_class), d.children_present ? "1" : "0",
                     std::to_string(d.health), d.has_license ? "1" : "0",
                     std::to_string(d.day_type), d.urban ? "1" : "0", num(e.start),
                     num(e.duration), e.location_type, e.activity_type, e.mode});
      }
    }
  }
  {
    CsvWriter w(dir + "/codebook.csv", {"attribute", "kind", "weight"});
    for (const auto& e : town.codebook)
      w.write_row({e.attribute, e.ordinal ? "ordinal" : "nominal", num(e.weight)});
  }
}

inline ProjectConfig mini_town_config(const std::string& dir) {
  ProjectConfig cfg;
  cfg.paths.marginals = dir + "/marginals.csv";
  cfg.paths.microsample = dir + "/microsample.csv";
  cfg.paths.projections = dir + "/projections.csv";
  cfg.paths.attributes = dir + "/attributes.csv";
  cfg.paths.diaries = dir + "/diaries.csv";
  cfg.paths.codebook = dir + "/codebook.csv";
  cfg.paths.nodes = dir + "/nodes.csv";
  cfg.paths.links = dir + "/links.csv";
  cfg.paths.transit_routes = dir + "/transit_routes.csv";
  cfg.paths.transit_stops = dir + "/transit_departures.csv";
  cfg.paths.buildings = dir + "/buildings.csv";
  cfg.paths.chargers = dir + "/chargers.csv";
  cfg.paths.output_dir = dir + "/out";
  return cfg;
}

}  // namespace daytrip::fixtures
