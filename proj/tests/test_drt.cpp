#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "daytrip/drt.hpp"
#include "daytrip/fixtures.hpp"
#include "daytrip/queue_sim.hpp"

using namespace daytrip;
using fixtures::LinkSpec;

namespace {

Scenario chain4() {
  return fixtures::make_chain_scenario(
      {LinkSpec{500, 10}, LinkSpec{500, 10}, LinkSpec{500, 10}, LinkSpec{500, 10}});
}

DailyPlan amod_trip(const Scenario& s, Time depart) {
  DailyPlan plan;
  PlanActivity a0;
  a0.type = ActivityType::home;
  a0.facility = "o";
  a0.location = s.facility("o").location;
  a0.end_time = depart;
  PlanActivity a1;
  a1.type = ActivityType::other;
  a1.facility = "d";
  a1.location = s.facility("d").location;
  a1.end_time = kDayEnd;
  plan.activities = {a0, a1};
  PlanLeg leg;
  leg.mode = Mode::amod;
  plan.legs = {leg};
  return plan;
}

DrtRequestRecord make_record(int id, Time submission, double direct_time, int origin,
                             int dest) {
  DrtRequestRecord r;
  r.id = id;
  r.person = 100 + id;
  r.submission = submission;
  r.origin_link = origin;
  r.dest_link = dest;
  r.direct_time = direct_time;
  return r;
}

int count_events(const std::vector<Event>& events, EventKind kind) {
  int n = 0;
  for (const auto& e : events)
    if (e.kind == kind) ++n;
  return n;
}

const Event* first_event(const std::vector<Event>& events, EventKind kind) {
  for (const auto& e : events)
    if (e.kind == kind) return &e;
  return nullptr;
}

}  // namespace

TEST_CASE("planner timeline accumulates drive and dwell", "[drt]") {
  auto s = chain4();
  DrtConfig cfg;
  TravelTimeEstimates est;
  DrtPlanner planner(s.network, cfg, est);

  REQUIRE(planner.drive_time(0, 0, 0) == 0.0);
  REQUIRE(planner.drive_path(0, 2, 0) == std::vector<int>{1, 2});
  REQUIRE(planner.drive_time(0, 3, 0) == Catch::Approx(150.0));
  REQUIRE_FALSE(std::isfinite(planner.drive_time(3, 0, 0)));  // one-way chain

  VehicleSnapshot v;
  v.id = 0;
  v.link = 0;
  v.free_at = 1000;
  std::vector<DrtStopPlan> stops = {
      DrtStopPlan{DrtStopKind::pickup, 1, 0, -1},
      DrtStopPlan{DrtStopKind::dropoff, 3, 0, -1},
  };
  auto tl = planner.timeline(v, stops);
  REQUIRE(tl.stops.size() == 2);
  REQUIRE(tl.stops[0].arrival == Catch::Approx(1050.0));
  REQUIRE(tl.stops[0].departure == Catch::Approx(1110.0));
  REQUIRE(tl.stops[1].arrival == Catch::Approx(1210.0));
  REQUIRE(tl.stops[1].departure == Catch::Approx(1270.0));
  REQUIRE(tl.completion == Catch::Approx(1270.0));
}

TEST_CASE("feasibility enforces wait, capacity and ride bounds", "[drt]") {
  auto s = chain4();
  DrtConfig cfg;
  TravelTimeEstimates est;
  DrtPlanner planner(s.network, cfg, est);

  VehicleSnapshot v;
  v.id = 0;
  v.link = 0;

  SECTION("maximum wait") {
    std::vector<DrtRequestRecord> records = {make_record(0, 0, 100, 1, 3)};
    std::vector<DrtStopPlan> stops = {DrtStopPlan{DrtStopKind::pickup, 1, 0, -1},
                                      DrtStopPlan{DrtStopKind::dropoff, 3, 0, -1}};
    v.free_at = 1800;  // pickup arrival 1850, 50 s past the submission+1800 bound
    auto tl = planner.timeline(v, stops);
    REQUIRE_FALSE(planner.feasible(v, stops, tl, records));
    records[0].submission = 100;
    REQUIRE(planner.feasible(v, stops, tl, records));
  }

  SECTION("capacity counts passengers already onboard") {
    DrtConfig tight = cfg;
    tight.vehicle_capacity = 1;
    DrtPlanner small(s.network, tight, est);
    std::vector<DrtRequestRecord> records = {make_record(0, 0, 100, 1, 3),
                                             make_record(1, 0, 100, 0, 2)};
    records[1].pickup_time = 0;  // already riding
    v.free_at = 0;
    v.onboard = {1};

    std::vector<DrtStopPlan> overfull = {DrtStopPlan{DrtStopKind::pickup, 1, 0, -1},
                                         DrtStopPlan{DrtStopKind::dropoff, 2, 1, -1},
                                         DrtStopPlan{DrtStopKind::dropoff, 3, 0, -1}};
    auto tl = small.timeline(v, overfull);
    REQUIRE_FALSE(small.feasible(v, overfull, tl, records));

    std::vector<DrtStopPlan> staged = {DrtStopPlan{DrtStopKind::dropoff, 2, 1, -1},
                                       DrtStopPlan{DrtStopKind::pickup, 2, 0, -1},
                                       DrtStopPlan{DrtStopKind::dropoff, 3, 0, -1}};
    records[0].origin_link = 2;
    records[0].direct_time = 50;
    tl = small.timeline(v, staged);
    REQUIRE(small.feasible(v, staged, tl, records));
  }

  SECTION("detour bound on ride time") {
    DrtConfig strict = cfg;
    strict.max_travel_time_alpha = 1.0;
    strict.max_travel_time_beta = 0.0;
    DrtPlanner hard(s.network, strict, est);
    std::vector<DrtRequestRecord> records = {make_record(0, 0, 100, 1, 3),
                                             make_record(1, 0, 100, 2, 3)};
    v.free_at = 0;
    v.onboard = {};
    // Shared stop at link 2 adds a 60 s dwell to request 0's ride.
    std::vector<DrtStopPlan> shared = {DrtStopPlan{DrtStopKind::pickup, 1, 0, -1},
                                       DrtStopPlan{DrtStopKind::pickup, 2, 1, -1},
                                       DrtStopPlan{DrtStopKind::dropoff, 3, 0, -1},
                                       DrtStopPlan{DrtStopKind::dropoff, 3, 1, -1}};
    auto tl = hard.timeline(v, shared);
    REQUIRE_FALSE(hard.feasible(v, shared, tl, records));
    DrtPlanner relaxed(s.network, cfg, est);  // default beta absorbs the dwell
    REQUIRE(relaxed.feasible(v, shared, tl, records));
  }
}

TEST_CASE("with_insertion covers every slot pair", "[drt]") {
  std::vector<DrtStopPlan> base = {DrtStopPlan{DrtStopKind::pickup, 10, 7, -1},
                                   DrtStopPlan{DrtStopKind::dropoff, 11, 7, -1}};
  auto kinds = [](const std::vector<DrtStopPlan>& stops) {
    std::vector<std::pair<DrtStopKind, int>> out;
    for (const auto& st : stops) out.emplace_back(st.kind, st.link);
    return out;
  };

  auto head = DrtPlanner::with_insertion(base, 9, 20, 21, 0, 0);
  REQUIRE(kinds(head) == std::vector<std::pair<DrtStopKind, int>>{
                             {DrtStopKind::pickup, 20},
                             {DrtStopKind::dropoff, 21},
                             {DrtStopKind::pickup, 10},
                             {DrtStopKind::dropoff, 11}});

  auto straddle = DrtPlanner::with_insertion(base, 9, 20, 21, 1, 2);
  REQUIRE(kinds(straddle) == std::vector<std::pair<DrtStopKind, int>>{
                                 {DrtStopKind::pickup, 10},
                                 {DrtStopKind::pickup, 20},
                                 {DrtStopKind::dropoff, 11},
                                 {DrtStopKind::dropoff, 21}});

  auto tail = DrtPlanner::with_insertion(base, 9, 20, 21, 2, 2);
  REQUIRE(kinds(tail) == std::vector<std::pair<DrtStopKind, int>>{
                             {DrtStopKind::pickup, 10},
                             {DrtStopKind::dropoff, 11},
                             {DrtStopKind::pickup, 20},
                             {DrtStopKind::dropoff, 21}});
}

TEST_CASE("best insertion equals an exhaustive re-derivation", "[drt]") {
  auto town = fixtures::make_mini_town(3);
  const Network& net = town.scenario.network;
  DrtConfig cfg;
  TravelTimeEstimates est;
  DrtPlanner planner(net, cfg, est);
  Rng rng(mix_seed(71, "drt-oracle"));

  auto car_link = [&](int) {
    while (true) {
      int l = static_cast<int>(rng.next_below(net.links.size()));
      if (net.links[l].allows(Mode::car)) return l;
    }
  };

  int agreements = 0;
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<DrtRequestRecord> records;
    std::vector<VehicleSnapshot> fleet;
    int vehicles = 1 + static_cast<int>(rng.next_below(3));
    for (int vi = 0; vi < vehicles; ++vi) {
      VehicleSnapshot v;
      v.id = vi;
      v.link = car_link(0);
      v.free_at = 28800 + 60.0 * static_cast<double>(rng.next_below(10));
      int pairs = static_cast<int>(rng.next_below(3));  // 0..2 scheduled trips
      for (int p = 0; p < pairs; ++p) {
        int id = static_cast<int>(records.size());
        int o = car_link(0);
        int d = car_link(0);
        auto rec = make_record(id, v.free_at, planner.drive_time(o, d, v.free_at), o, d);
        records.push_back(rec);
        v.stops.push_back(DrtStopPlan{DrtStopKind::pickup, o, id, -1});
        v.stops.push_back(DrtStopPlan{DrtStopKind::dropoff, d, id, -1});
      }
      fleet.push_back(std::move(v));
    }

    int id = static_cast<int>(records.size());
    int o = car_link(0);
    int d = car_link(0);
    Time now = 28800 + 60.0 * static_cast<double>(rng.next_below(10));
    auto request = make_record(id, now, planner.drive_time(o, d, now), o, d);
    records.push_back(request);

    // Independent search: same constraint set, re-derived timing loop.
    std::optional<InsertionCandidate> oracle;
    for (const auto& v : fleet) {
      auto schedule_completion = [&](const std::vector<DrtStopPlan>& stops) {
        Time t = v.free_at;
        int at = v.link;
        for (const auto& stop : stops) {
          t += planner.drive_time(at, stop.link, t);
          if (stop.kind == DrtStopKind::pickup || stop.kind == DrtStopKind::dropoff)
            t += cfg.stop_duration_s;
          at = stop.link;
        }
        return t;
      };
      auto ok = [&](const std::vector<DrtStopPlan>& stops) {
        Time t = v.free_at;
        int at = v.link;
        int occ = static_cast<int>(v.onboard.size());
        std::map<int, Time> picked;
        for (const auto& stop : stops) {
          t += planner.drive_time(at, stop.link, t);
          if (!std::isfinite(t)) return false;
          if (stop.kind == DrtStopKind::pickup) {
            if (t - records[stop.request].submission > cfg.max_wait_s + 1e-9) return false;
            picked[stop.request] = t;
            if (++occ > cfg.vehicle_capacity) return false;
          } else if (stop.kind == DrtStopKind::dropoff) {
            const auto& r = records[stop.request];
            Time on = picked.count(stop.request) ? picked[stop.request] : r.pickup_time;
            double bound = cfg.max_travel_time_alpha * r.direct_time + cfg.max_travel_time_beta;
            if (t - on > bound + 1e-9) return false;
            occ -= 1;
          }
          if (stop.kind == DrtStopKind::pickup || stop.kind == DrtStopKind::dropoff)
            t += cfg.stop_duration_s;
          at = stop.link;
        }
        return true;
      };

      double base = schedule_completion(v.stops);
      int n = static_cast<int>(v.stops.size());
      for (int i = 0; i <= n; ++i) {
        for (int j = i; j <= n; ++j) {
          auto stops = DrtPlanner::with_insertion(v.stops, request.id, o, d, i, j);
          double done = schedule_completion(stops);
          if (!std::isfinite(done) || !ok(stops)) continue;
          double cost = done - base;
          if (!oracle || cost < oracle->cost - 1e-9) oracle = InsertionCandidate{v.id, i, j, cost};
        }
      }
    }

    auto got = planner.find_best_insertion(fleet, request, records);
    REQUIRE(got.has_value() == oracle.has_value());
    if (got) {
      REQUIRE(got->vehicle == oracle->vehicle);
      REQUIRE(got->pickup_index == oracle->pickup_index);
      REQUIRE(got->dropoff_index == oracle->dropoff_index);
      REQUIRE(got->cost == Catch::Approx(oracle->cost).margin(1e-9));
      ++agreements;
    }
  }
  REQUIRE(agreements > 10);  // the fixtures must exercise the accept path
}

TEST_CASE("fleet serves a request end to end", "[drt]") {
  auto s = chain4();
  DrtConfig cfg;
  cfg.fleet_size = 1;
  cfg.depot_link = "l0";
  RebalancingConfig reb;
  reb.enabled = false;
  TravelTimeEstimates est;
  DrtFleet fleet(s, cfg, reb, est);

  SimulationConfig sim_cfg;
  QueueSim sim(s, sim_cfg, est);
  sim.set_drt(&fleet);

  auto plan = amod_trip(s, 28800);
  std::vector<SimAgentSpec> specs = {{7, &plan, false, true}};
  SimulationSummary summary;
  auto events = sim.run(specs, &summary);

  REQUIRE(summary.departures == 1);
  REQUIRE(summary.arrivals == 1);
  REQUIRE(summary.stuck == 0);
  REQUIRE(count_events(events, EventKind::drt_request) == 1);
  REQUIRE(count_events(events, EventKind::drt_pickup) == 1);
  REQUIRE(count_events(events, EventKind::drt_dropoff) == 1);

  const Event* pickup = first_event(events, EventKind::drt_pickup);
  const Event* dropoff = first_event(events, EventKind::drt_dropoff);
  const Event* arrive = first_event(events, EventKind::arrive);
  REQUIRE(pickup->time == Catch::Approx(28800.0));      // depot is the origin link
  REQUIRE(dropoff->time == Catch::Approx(29010.0));     // 60 s dwell + 150 s drive
  REQUIRE(arrive->time == dropoff->time);
  REQUIRE(arrive->distance == Catch::Approx(1500.0));   // links 1..3 while onboard
  REQUIRE(pickup->vehicle == "amod:0");

  auto stats = fleet.stats();
  REQUIRE(stats.requests == 1);
  REQUIRE(stats.served == 1);
  REQUIRE(stats.rejected == 0);
  REQUIRE(stats.wait_violations == 0);
  REQUIRE(stats.fleet_distance_m == Catch::Approx(1500.0));

  const auto& rec = fleet.requests().at(0);
  REQUIRE(rec.state == RequestState::completed);
  REQUIRE(rec.pickup_time <= rec.dropoff_time);
  REQUIRE_FALSE(fleet.task_log().empty());
}

TEST_CASE("an empty fleet rejects and the day stays conserved", "[drt]") {
  auto s = chain4();
  DrtConfig cfg;
  cfg.fleet_size = 0;
  RebalancingConfig reb;
  reb.enabled = false;
  TravelTimeEstimates est;
  DrtFleet fleet(s, cfg, reb, est);

  SimulationConfig sim_cfg;
  QueueSim sim(s, sim_cfg, est);
  sim.set_drt(&fleet);

  auto plan = amod_trip(s, 28800);
  std::vector<SimAgentSpec> specs = {{7, &plan, false, true}};
  SimulationSummary summary;
  auto events = sim.run(specs, &summary);

  REQUIRE(summary.departures == 0);
  REQUIRE(summary.arrivals == 0);
  REQUIRE(summary.stuck == 0);
  REQUIRE(summary.drt_rejections == 1);
  const Event* reject = first_event(events, EventKind::drt_reject);
  REQUIRE(reject != nullptr);
  REQUIRE(reject->info == "no_feasible_insertion");
  REQUIRE(fleet.stats().rejected == 1);
  // The rider still starts the next activity, just without traveling.
  REQUIRE(count_events(events, EventKind::act_start) == 1);
}

TEST_CASE("low battery sends an idle vehicle to charge up to the target", "[drt]") {
  auto s = chain4();
  Charger c;
  c.id = "c0";
  c.link_id = "l3";
  c.link = 3;
  s.chargers.push_back(c);

  DrtConfig cfg;
  cfg.fleet_size = 1;
  cfg.depot_link = "l0";
  cfg.initial_soc = 21.0;
  cfg.consumption_pct_per_km = 1.0;  // 1.5 km trip ends below the 20% threshold
  RebalancingConfig reb;
  reb.enabled = false;
  TravelTimeEstimates est;
  DrtFleet fleet(s, cfg, reb, est);

  SimulationConfig sim_cfg;
  QueueSim sim(s, sim_cfg, est);
  sim.set_drt(&fleet);

  auto plan = amod_trip(s, 28800);
  std::vector<SimAgentSpec> specs = {{7, &plan, false, true}};
  auto events = sim.run(specs);

  REQUIRE(count_events(events, EventKind::charge_start) == 1);
  REQUIRE(count_events(events, EventKind::charge_end) == 1);
  const Event* start = first_event(events, EventKind::charge_start);
  const Event* end = first_event(events, EventKind::charge_end);
  REQUIRE(start->info == "c0");
  // 21 - 1.5 = 19.5% at the plug; charging to 80% at 1%/min takes 3630 s.
  REQUIRE(end->time - start->time == Catch::Approx(3630.0));

  auto socs = fleet.vehicle_socs();
  REQUIRE(socs.size() == 1);
  REQUIRE(socs[0] == Catch::Approx(80.0));
  REQUIRE(fleet.stats().charge_sessions == 1);
}

TEST_CASE("healthy battery never triggers a charge", "[drt]") {
  auto s = chain4();
  Charger c;
  c.id = "c0";
  c.link_id = "l3";
  c.link = 3;
  s.chargers.push_back(c);

  DrtConfig cfg;
  cfg.fleet_size = 1;
  cfg.depot_link = "l0";
  cfg.initial_soc = 21.0;  // default 0.4%/km leaves 20.4%, above the threshold
  RebalancingConfig reb;
  reb.enabled = false;
  TravelTimeEstimates est;
  DrtFleet fleet(s, cfg, reb, est);

  SimulationConfig sim_cfg;
  QueueSim sim(s, sim_cfg, est);
  sim.set_drt(&fleet);

  auto plan = amod_trip(s, 28800);
  std::vector<SimAgentSpec> specs = {{7, &plan, false, true}};
  auto events = sim.run(specs);

  REQUIRE(count_events(events, EventKind::charge_start) == 0);
  REQUIRE(fleet.stats().charge_sessions == 0);
  REQUIRE(fleet.vehicle_socs()[0] == Catch::Approx(20.4));
}

TEST_CASE("a drained vehicle strands and the rider counts as stuck", "[drt]") {
  auto s = chain4();
  DrtConfig cfg;
  cfg.fleet_size = 1;
  cfg.depot_link = "l0";
  cfg.initial_soc = 21.0;
  cfg.consumption_pct_per_km = 20.0;  // dies after ~1 km
  RebalancingConfig reb;
  reb.enabled = false;
  TravelTimeEstimates est;
  DrtFleet fleet(s, cfg, reb, est);

  SimulationConfig sim_cfg;
  QueueSim sim(s, sim_cfg, est);
  sim.set_drt(&fleet);

  auto plan = amod_trip(s, 28800);
  std::vector<SimAgentSpec> specs = {{7, &plan, false, true}};
  SimulationSummary summary;
  auto events = sim.run(specs, &summary);

  REQUIRE(fleet.stats().stranded == 1);
  REQUIRE(summary.departures == 1);
  REQUIRE(summary.arrivals + summary.stuck == summary.departures);
  auto socs = fleet.vehicle_socs();
  REQUIRE(socs[0] >= 0.0);
  REQUIRE(socs[0] <= 100.0);
  bool battery_event = false;
  for (const auto& e : events)
    if (e.kind == EventKind::stuck && e.info == "battery_empty") battery_event = true;
  REQUIRE(battery_event);
}

TEST_CASE("requests still open at day end are rejected", "[drt]") {
  auto s = chain4();
  Facility mid;
  mid.id = "m";
  mid.location = s.network.link_midpoint(2);
  mid.types.insert(FacilityType::other);
  mid.zone_id = "z0";
  mid.link = 2;
  s.facilities.push_back(mid);
  s.index_facilities();

  DrtConfig cfg;
  cfg.fleet_size = 1;
  cfg.depot_link = "l0";
  RebalancingConfig reb;
  reb.enabled = false;
  TravelTimeEstimates est;
  DrtFleet fleet(s, cfg, reb, est);

  SimulationConfig sim_cfg;
  sim_cfg.end_time = 28850;  // the 100 s approach to the pickup cannot finish
  QueueSim sim(s, sim_cfg, est);
  sim.set_drt(&fleet);

  auto plan = amod_trip(s, 28800);
  plan.activities[0].facility = "m";
  plan.activities[0].location = s.facility("m").location;
  std::vector<SimAgentSpec> specs = {{7, &plan, false, true}};
  SimulationSummary summary;
  auto events = sim.run(specs, &summary);

  const auto& rec = fleet.requests().at(0);
  REQUIRE(rec.state == RequestState::rejected);
  REQUIRE(rec.reason == "end_of_day");
  REQUIRE(summary.departures == 1);
  REQUIRE(summary.arrivals == 0);
  REQUIRE(summary.stuck == 1);
  REQUIRE(first_event(events, EventKind::drt_reject) != nullptr);
}
