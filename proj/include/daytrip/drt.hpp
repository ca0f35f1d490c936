#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/events.hpp"
#include "daytrip/mincostflow.hpp"
#include "daytrip/network_router.hpp"
#include "daytrip/queue_sim.hpp"
#include "daytrip/scenario.hpp"

namespace daytrip {

struct DrtConfig {
  int fleet_size = 0;
  int vehicle_capacity = 4;
  double max_wait_s = 1800.0;
  double stop_duration_s = 60.0;
  double max_travel_time_alpha = 1.5;
  double max_travel_time_beta = 1800.0;  // seconds, defaults to max_wait
  double travel_time_estimation_alpha = 0.05;
  double travel_time_estimation_beta = 0.0;
  std::string depot_link;      // start link for the whole fleet
  double av_pce = 0.5;         // flow footprint of one AV
  double initial_soc = 100.0;  // percent
  double consumption_pct_per_km = 0.4;
  double charge_rate_pct_per_min = 1.0;
  double charge_below_soc = 20.0;
  double charge_to_soc = 80.0;

  void validate() const {
    if (fleet_size < 0) throw Error("fleet_size must be >= 0");
    if (vehicle_capacity < 1) throw Error("vehicle_capacity must be >= 1");
    if (max_wait_s <= 0) throw Error("max_wait must be > 0");
    if (max_travel_time_alpha < 1.0) throw Error("max_travel_time_alpha must be >= 1");
  }
};

struct RebalancingConfig {
  bool enabled = true;
  double cell_size_m = 1000.0;
  double interval_s = 1800.0;
  double target_alpha = 0.5;
  double target_beta = 0.5;

  void validate() const {
    if (interval_s <= 0) throw Error("rebalancing interval must be > 0");
    if (cell_size_m <= 0) throw Error("rebalancing cell size must be > 0");
  }
};

// Uniform grid over the network bounding box; zones index row-major.
class ZoneGrid {
 public:
  ZoneGrid() = default;
  ZoneGrid(const Network& net, double cell_m) : origin_(net.bbox_min), cell_(cell_m) {
    nx_ = std::max<int>(1, static_cast<int>(std::ceil((net.bbox_max.x - origin_.x) / cell_)));
    ny_ = std::max<int>(1, static_cast<int>(std::ceil((net.bbox_max.y - origin_.y) / cell_)));
  }

  int zone_of(const Point& p) const {
    int cx = std::clamp(static_cast<int>(std::floor((p.x - origin_.x) / cell_)), 0, nx_ - 1);
    int cy = std::clamp(static_cast<int>(std::floor((p.y - origin_.y) / cell_)), 0, ny_ - 1);
    return cy * nx_ + cx;
  }

  Point centroid(int zone) const {
    int cy = zone / nx_, cx = zone % nx_;
    return {origin_.x + (cx + 0.5) * cell_, origin_.y + (cy + 0.5) * cell_};
  }

  int count() const { return nx_ * ny_; }

 private:
  Point origin_{0, 0};
  double cell_ = 1000.0;
  int nx_ = 1, ny_ = 1;
};

enum class DrtStopKind { pickup, dropoff, relocate, charge };

inline const char* drt_stop_kind_name(DrtStopKind k) {
  switch (k) {
    case DrtStopKind::pickup: return "pickup";
    case DrtStopKind::dropoff: return "dropoff";
    case DrtStopKind::relocate: return "relocate";
    case DrtStopKind::charge: return "charge";
  }
  return "?";
}

struct DrtStopPlan {
  DrtStopKind kind = DrtStopKind::pickup;
  int link = -1;
  int request = -1;   // pickup/dropoff
  int charger = -1;   // charge
};

enum class RequestState { pending, scheduled, picked_up, completed, rejected };

inline const char* request_state_name(RequestState s) {
  switch (s) {
    case RequestState::pending: return "pending";
    case RequestState::scheduled: return "scheduled";
    case RequestState::picked_up: return "picked_up";
    case RequestState::completed: return "completed";
    case RequestState::rejected: return "rejected";
  }
  return "?";
}

struct DrtRequestRecord {
  int id = -1;
  PersonId person = -1;
  Time submission = 0;
  int origin_link = -1;
  int dest_link = -1;
  int origin_zone = -1;
  double direct_time = 0;  // unshared drive, estimated at submission
  RequestState state = RequestState::pending;
  int vehicle = -1;
  Time pickup_time = -1;
  Time dropoff_time = -1;
  double distance = 0;  // meters actually driven while onboard
  std::string reason;   // rejection reason
};

// What insertion evaluation needs to know about a vehicle: where it can next
// be redirected, its future stop sequence (relocations stripped), and who is
// onboard.
struct VehicleSnapshot {
  int id = -1;
  int link = -1;
  Time free_at = 0;
  std::vector<DrtStopPlan> stops;
  std::vector<int> onboard;
};

struct InsertionCandidate {
  int vehicle = -1;
  int pickup_index = -1;
  int dropoff_index = -1;
  double cost = std::numeric_limits<double>::infinity();
};

struct StopTiming {
  Time arrival = 0;
  Time departure = 0;
};

struct ScheduleTimeline {
  std::vector<StopTiming> stops;
  Time completion = 0;
};

// Deterministic schedule arithmetic shared by insertion search and the motion
// replay: drive legs are timed with the fleet's travel-time estimates; each
// pickup/dropoff stop dwells for the configured stop duration.
class DrtPlanner {
 public:
  DrtPlanner(const Network& net, const DrtConfig& cfg, const TravelTimeEstimates& estimates)
      : net_(&net), cfg_(&cfg), estimates_(&estimates), router_(net, Mode::car) {}

  const DrtConfig& config() const { return *cfg_; }

  // Path the vehicle takes after finishing `from`, excluding `from` itself.
  std::vector<int> drive_path(int from, int to, Time depart) const {
    if (from == to) return {};
    auto path = router_.route(from, to, depart, *estimates_);
    if (path.empty()) return {};
    return std::vector<int>(path.begin() + 1, path.end());
  }

  double drive_time(int from, int to, Time depart) const {
    if (from == to) return 0;
    auto path = drive_path(from, to, depart);
    if (path.empty()) return std::numeric_limits<double>::infinity();
    Time t = depart;
    for (int l : path) t += estimates_->get(l, t, link_freeflow(net_->links[l]));
    return t - depart;
  }

  ScheduleTimeline timeline(const VehicleSnapshot& v,
                            const std::vector<DrtStopPlan>& stops) const {
    ScheduleTimeline tl;
    Time t = v.free_at;
    int link = v.link;
    for (const auto& stop : stops) {
      t += drive_time(link, stop.link, t);
      StopTiming st;
      st.arrival = t;
      bool dwell = stop.kind == DrtStopKind::pickup || stop.kind == DrtStopKind::dropoff;
      st.departure = t + (dwell ? cfg_->stop_duration_s : 0.0);
      t = st.departure;
      link = stop.link;
      tl.stops.push_back(st);
    }
    tl.completion = t;
    return tl;
  }

  // Hard-constraint check over a tentative schedule. `records` resolves each
  // request id; the new request must already be in it.
  bool feasible(const VehicleSnapshot& v, const std::vector<DrtStopPlan>& stops,
                const ScheduleTimeline& tl,
                const std::vector<DrtRequestRecord>& records) const {
    int occ = static_cast<int>(v.onboard.size());
    std::map<int, Time> pickup_at;
    for (size_t k = 0; k < stops.size(); ++k) {
      if (!std::isfinite(tl.stops[k].arrival)) return false;
      if (stops[k].kind == DrtStopKind::pickup) {
        const auto& r = records[stops[k].request];
        if (tl.stops[k].arrival - r.submission > cfg_->max_wait_s + 1e-9) return false;
        pickup_at[stops[k].request] = tl.stops[k].arrival;
        occ += 1;
        if (occ > cfg_->vehicle_capacity) return false;
      } else if (stops[k].kind == DrtStopKind::dropoff) {
        const auto& r = records[stops[k].request];
        auto it = pickup_at.find(stops[k].request);
        Time picked = it != pickup_at.end() ? it->second : r.pickup_time;  // onboard
        double ride = tl.stops[k].arrival - picked;
        double bound = cfg_->max_travel_time_alpha * r.direct_time + cfg_->max_travel_time_beta;
        if (ride > bound + 1e-9) return false;
        occ -= 1;
      }
    }
    return true;
  }

  // Stops with the request's pickup inserted before original index i and the
  // dropoff before original index j (immediately after the pickup when j==i).
  static std::vector<DrtStopPlan> with_insertion(const std::vector<DrtStopPlan>& stops,
                                                 int request, int origin, int dest, int i,
                                                 int j) {
    std::vector<DrtStopPlan> out;
    out.reserve(stops.size() + 2);
    DrtStopPlan pickup{DrtStopKind::pickup, origin, request, -1};
    DrtStopPlan dropoff{DrtStopKind::dropoff, dest, request, -1};
    for (int k = 0; k <= static_cast<int>(stops.size()); ++k) {
      if (k == i) out.push_back(pickup);
      if (k == j) out.push_back(dropoff);
      if (k < static_cast<int>(stops.size())) out.push_back(stops[k]);
    }
    return out;
  }

  // Exhaustive search over vehicles and slot pairs; lowest added operation
  // time wins, ties to the lower (vehicle, pickup, dropoff) triple.
  std::optional<InsertionCandidate> find_best_insertion(
      const std::vector<VehicleSnapshot>& fleet, const DrtRequestRecord& request,
      const std::vector<DrtRequestRecord>& records) const {
    InsertionCandidate best;
    bool found = false;
    for (const auto& v : fleet) {
      ScheduleTimeline base = timeline(v, v.stops);
      const int n = static_cast<int>(v.stops.size());
      for (int i = 0; i <= n; ++i) {
        for (int j = i; j <= n; ++j) {
          auto stops = with_insertion(v.stops, request.id, request.origin_link,
                                      request.dest_link, i, j);
          ScheduleTimeline tl = timeline(v, stops);
          if (!std::isfinite(tl.completion)) continue;
          if (!feasible(v, stops, tl, records)) continue;
          double cost = tl.completion - base.completion;
          if (!found || cost < best.cost - 1e-9) {
            best = {v.id, i, j, cost};
            found = true;
          }
        }
      }
    }
    if (!found) return std::nullopt;
    return best;
  }

 private:
  const Network* net_;
  const DrtConfig* cfg_;
  const TravelTimeEstimates* estimates_;
  CarRouter router_;
};

struct FleetLogRow {
  int vehicle = -1;
  std::string task;
  Time start = 0;
  Time end = 0;
  std::string link;
  int request = -1;
};

struct FleetStats {
  int requests = 0;
  int served = 0;
  int rejected = 0;
  double fleet_distance_m = 0;
  int relocations = 0;
  int charge_sessions = 0;
  int stranded = 0;
  int wait_violations = 0;  // must stay 0
};

// The running fleet: insertion dispatch, scheduled motion replayed through
// the sim (flow pulses only), rebalancing ticks, batteries and charging.
class DrtFleet : public DrtDispatch {
 public:
  DrtFleet(const Scenario& scenario, const DrtConfig& cfg, const RebalancingConfig& reb,
           const TravelTimeEstimates& estimates,
           const std::map<std::pair<int, int>, int>* expected_demand = nullptr)
      : scen_(&scenario), cfg_(&cfg), reb_(&reb), estimates_(&estimates),
        planner_(scenario.network, cfg, estimates),
        zones_(scenario.network, reb.cell_size_m) {
    cfg_->validate();
    reb_->validate();
    if (expected_demand) expected_ = *expected_demand;
  }

  // --- DrtDispatch -----------------------------------------------------------

  void on_prepare(QueueSim& sim) override {
    sim_ = &sim;
    int depot = resolve_depot();
    vehicles_.clear();
    vehicles_.resize(static_cast<size_t>(cfg_->fleet_size));
    for (size_t i = 0; i < vehicles_.size(); ++i) {
      Veh& v = vehicles_[i];
      v.id = static_cast<int>(i);
      v.link = depot;
      v.soc = cfg_->initial_soc;
    }
    chargers_.clear();
    chargers_.resize(scen_->chargers.size());
    if (reb_->enabled) {
      for (Time t = reb_->interval_s; t < sim.config().end_time; t += reb_->interval_s)
        sim.at(t, [this, t] { rebalance_tick(t); });
    }
  }

  void on_request(QueueSim& sim, PersonId person, int origin_link, int dest_link,
                  const Point& origin, const Point& destination, Time now) override {
    (void)origin;
    (void)destination;
    DrtRequestRecord rec;
    rec.id = static_cast<int>(requests_.size());
    rec.person = person;
    rec.submission = now;
    rec.origin_link = origin_link;
    rec.dest_link = dest_link;
    rec.origin_zone = zones_.zone_of(scen_->network.link_midpoint(origin_link));
    rec.direct_time = planner_.drive_time(origin_link, dest_link, now);
    requests_.push_back(rec);
    DrtRequestRecord& r = requests_.back();

    std::vector<VehicleSnapshot> fleet;
    for (const Veh& v : vehicles_)
      if (!v.charging && !v.stranded) fleet.push_back(snapshot(v, now));

    auto best = std::isfinite(r.direct_time)
                    ? planner_.find_best_insertion(fleet, r, requests_)
                    : std::nullopt;
    if (!best) {
      r.state = RequestState::rejected;
      r.reason = std::isfinite(r.direct_time) ? "no_feasible_insertion" : "unreachable";
      Event e;
      e.time = now;
      e.kind = EventKind::drt_reject;
      e.person = person;
      e.mode = mode_name(Mode::amod);
      e.info = r.reason;
      sim.emit(std::move(e));
      sim.drt_rejected(person);
      return;
    }

    Veh& v = vehicles_[static_cast<size_t>(best->vehicle)];
    VehicleSnapshot snap = snapshot(v, now);
    v.stops = DrtPlanner::with_insertion(snap.stops, r.id, r.origin_link, r.dest_link,
                                         best->pickup_index, best->dropoff_index);
    r.state = RequestState::scheduled;
    r.vehicle = v.id;
    sim.drt_accepted(person, origin_link);
    rebuild_motion(v, now);
  }

  void on_day_end(QueueSim& sim, Time now) override {
    for (auto& r : requests_) {
      if (r.state == RequestState::scheduled || r.state == RequestState::pending) {
        r.state = RequestState::rejected;
        r.reason = "end_of_day";
        Event e;
        e.time = now;
        e.kind = EventKind::drt_reject;
        e.person = r.person;
        e.mode = mode_name(Mode::amod);
        e.info = r.reason;
        sim.emit(std::move(e));
      }
    }
  }

  // --- outputs ----------------------------------------------------------------

  const std::vector<DrtRequestRecord>& requests() const { return requests_; }
  const std::vector<FleetLogRow>& task_log() const { return log_; }

  FleetStats stats() const {
    FleetStats s;
    s.requests = static_cast<int>(requests_.size());
    for (const auto& r : requests_) {
      if (r.state == RequestState::completed) {
        s.served += 1;
        if (r.pickup_time - r.submission > cfg_->max_wait_s + 1e-6) s.wait_violations += 1;
      }
      if (r.state == RequestState::rejected) s.rejected += 1;
    }
    for (const auto& v : vehicles_) {
      s.fleet_distance_m += v.distance;
      if (v.stranded) s.stranded += 1;
    }
    s.relocations = relocations_;
    s.charge_sessions = charge_sessions_;
    return s;
  }

  std::map<int, int> zone_request_counts() const {
    std::map<int, int> out;
    for (const auto& r : requests_) out[r.origin_zone] += 1;
    return out;
  }

  std::vector<double> vehicle_socs() const {
    std::vector<double> out;
    out.reserve(vehicles_.size());
    for (const auto& v : vehicles_) out.push_back(v.soc);
    return out;
  }

  // Demand table for the next iteration: (zone, interval index) -> requests.
  std::map<std::pair<int, int>, int> demand_table() const {
    std::map<std::pair<int, int>, int> out;
    for (const auto& r : requests_) {
      int slot = static_cast<int>(std::floor(r.submission / reb_->interval_s));
      out[{r.origin_zone, slot}] += 1;
    }
    return out;
  }

  const ZoneGrid& zones() const { return zones_; }

 private:
  struct Veh {
    int id = -1;
    int link = -1;
    double soc = 100;
    bool stranded = false;
    bool charging = false;  // any phase: driving to charger, queued, plugged
    bool plugged = false;
    std::vector<DrtStopPlan> stops;
    std::vector<int> onboard;  // request ids
    int version = 0;
    // motion
    bool driving = false;
    std::vector<int> path;
    std::vector<Time> exits;
    size_t pos = 0;
    bool dwelling = false;
    Time busy_until = 0;
    double distance = 0;  // total meters driven
  };

  struct ChargerState {
    int busy_plugs = 0;
    std::vector<int> queue;  // vehicle ids waiting, arrival order
  };

  int resolve_depot() const {
    if (!cfg_->depot_link.empty()) {
      auto it = scen_->network.link_index.find(cfg_->depot_link);
      if (it == scen_->network.link_index.end())
        throw Error("depot link " + cfg_->depot_link + " not in network");
      return it->second;
    }
    // Fixture default: the link nearest the network bounding-box center.
    Point c{0.5 * (scen_->network.bbox_min.x + scen_->network.bbox_max.x),
            0.5 * (scen_->network.bbox_min.y + scen_->network.bbox_max.y)};
    int l = scen_->network.nearest_link(c, Mode::car);
    if (l < 0) throw Error("network has no car links for a depot");
    return l;
  }

  VehicleSnapshot snapshot(const Veh& v, Time now) const {
    VehicleSnapshot s;
    s.id = v.id;
    s.onboard = v.onboard;
    if (v.dwelling || v.plugged) {
      s.link = v.link;
      s.free_at = v.busy_until;
    } else if (v.driving) {
      s.link = v.path[v.pos];
      s.free_at = v.exits[v.pos];
    } else {
      s.link = v.link;
      s.free_at = now;
    }
    for (const auto& st : v.stops)
      if (st.kind != DrtStopKind::relocate) s.stops.push_back(st);
    return s;
  }

  void log_task(const Veh& v, const std::string& task, Time start, Time end, int link,
                int request = -1) {
    FleetLogRow row;
    row.vehicle = v.id;
    row.task = task;
    row.start = start;
    row.end = end;
    row.link = link >= 0 ? scen_->network.links[link].id : "";
    row.request = request;
    log_.push_back(std::move(row));
  }

  std::string veh_id_str(const Veh& v) const { return "amod:" + std::to_string(v.id); }

  void emit_vehicle_event(EventKind kind, const Veh& v, Time t, int link,
                          PersonId person = -1, const std::string& info = "") {
    Event e;
    e.time = t;
    e.kind = kind;
    e.person = person;
    e.mode = mode_name(Mode::amod);
    if (link >= 0) e.link = scen_->network.links[link].id;
    e.vehicle = veh_id_str(v);
    e.info = info;
    sim_->emit(std::move(e));
  }

  // Rebuilds the motion program after any schedule change. A driving vehicle
  // finishes its current link first (diversion happens at the next node).
  void rebuild_motion(Veh& v, Time now) {
    v.version += 1;
    const int ver = v.version;
    if (v.plugged || v.stranded) return;  // current task finishes on its own
    if (v.dwelling) {
      sim_->at(v.busy_until, [this, id = v.id, ver] {
        Veh& v = vehicles_[static_cast<size_t>(id)];
        if (v.version != ver) return;
        v.dwelling = false;
        drive_to_next_stop(v, sim_->now());
      });
      return;
    }
    if (v.driving) {
      sim_->at(v.exits[v.pos], [this, id = v.id, ver] {
        Veh& v = vehicles_[static_cast<size_t>(id)];
        if (v.version != ver) return;
        int link = v.path[v.pos];
        finish_link(v, link, sim_->now());
        if (v.stranded) return;
        v.driving = false;
        v.link = link;
        drive_to_next_stop(v, sim_->now());
      });
      return;
    }
    drive_to_next_stop(v, now);
  }

  void drive_to_next_stop(Veh& v, Time now) {
    if (v.stops.empty()) {
      become_idle(v, now);
      return;
    }
    const DrtStopPlan& stop = v.stops.front();
    if (stop.link == v.link) {
      arrive_at_stop(v, now);
      return;
    }
    auto path = planner_.drive_path(v.link, stop.link, now);
    if (path.empty()) {
      // Unreachable stop: treat as a stranding-grade failure.
      strand(v, now, "unroutable");
      return;
    }
    v.driving = true;
    v.path = std::move(path);
    v.exits.assign(v.path.size(), 0);
    Time t = now;
    for (size_t k = 0; k < v.path.size(); ++k) {
      t += estimates_->get(v.path[k], t, link_freeflow(scen_->network.links[v.path[k]]));
      v.exits[k] = t;
    }
    v.pos = 0;
    emit_vehicle_event(EventKind::link_enter, v, now, v.path[0]);
    log_task(v, "drive", now, v.exits.back(), stop.link,
             stop.request >= 0 ? stop.request : -1);
    schedule_exit(v);
  }

  void schedule_exit(Veh& v) {
    const int ver = v.version;
    sim_->at(v.exits[v.pos], [this, id = v.id, ver] {
      Veh& v = vehicles_[static_cast<size_t>(id)];
      if (v.version != ver) return;
      Time now = sim_->now();
      int link = v.path[v.pos];
      finish_link(v, link, now);
      if (v.stranded) return;
      if (v.pos + 1 < v.path.size()) {
        v.pos += 1;
        emit_vehicle_event(EventKind::link_enter, v, now, v.path[v.pos]);
        schedule_exit(v);
      } else {
        v.driving = false;
        v.link = link;
        arrive_at_stop(v, now);
      }
    });
  }

  // Exit-side bookkeeping for one traversed link: events, flow pulse, battery,
  // onboard distance.
  void finish_link(Veh& v, int link, Time now) {
    emit_vehicle_event(EventKind::link_leave, v, now, link);
    sim_->flow_pulse(link, cfg_->av_pce);
    double km = scen_->network.links[link].length / 1000.0;
    v.distance += scen_->network.links[link].length;
    for (int rid : v.onboard) requests_[rid].distance += scen_->network.links[link].length;
    v.soc -= cfg_->consumption_pct_per_km * km;
    if (v.soc <= 0) {
      v.soc = 0;
      strand(v, now, "battery_empty");
    }
  }

  void strand(Veh& v, Time now, const std::string& why) {
    v.stranded = true;
    v.driving = false;
    v.dwelling = false;
    v.charging = false;
    v.version += 1;
    Event e;
    e.time = now;
    e.kind = EventKind::stuck;
    e.mode = mode_name(Mode::amod);
    e.vehicle = veh_id_str(v);
    e.info = why;
    sim_->emit(std::move(e));
    // Pending pickups can still be refused; onboard passengers are stuck.
    for (const auto& stop : v.stops) {
      if (stop.kind != DrtStopKind::pickup) continue;
      DrtRequestRecord& r = requests_[stop.request];
      if (r.state != RequestState::scheduled) continue;
      r.state = RequestState::rejected;
      r.reason = "vehicle_" + why;
      sim_->drt_failed(r.person);
    }
    v.stops.clear();
    log_task(v, "stranded", now, now, v.link);
  }

  void arrive_at_stop(Veh& v, Time now) {
    DrtStopPlan stop = v.stops.front();
    switch (stop.kind) {
      case DrtStopKind::pickup: {
        v.stops.erase(v.stops.begin());
        DrtRequestRecord& r = requests_[stop.request];
        r.state = RequestState::picked_up;
        r.pickup_time = now;
        v.onboard.push_back(stop.request);
        emit_vehicle_event(EventKind::drt_pickup, v, now, stop.link, r.person);
        log_task(v, "pickup", now, now + cfg_->stop_duration_s, stop.link, stop.request);
        dwell(v, now);
        break;
      }
      case DrtStopKind::dropoff: {
        v.stops.erase(v.stops.begin());
        DrtRequestRecord& r = requests_[stop.request];
        r.state = RequestState::completed;
        r.dropoff_time = now;
        v.onboard.erase(std::find(v.onboard.begin(), v.onboard.end(), stop.request));
        emit_vehicle_event(EventKind::drt_dropoff, v, now, stop.link, r.person);
        log_task(v, "dropoff", now, now + cfg_->stop_duration_s, stop.link, stop.request);
        sim_->drt_completed(r.person, r.distance);
        dwell(v, now);
        break;
      }
      case DrtStopKind::relocate: {
        v.stops.erase(v.stops.begin());
        log_task(v, "relocate_arrive", now, now, v.link);
        become_idle(v, now);
        break;
      }
      case DrtStopKind::charge: {
        v.stops.erase(v.stops.begin());
        request_plug(v, stop.charger, now);
        break;
      }
    }
  }

  void dwell(Veh& v, Time now) {
    v.dwelling = true;
    v.busy_until = now + cfg_->stop_duration_s;
    const int ver = v.version;
    sim_->at(v.busy_until, [this, id = v.id, ver] {
      Veh& v = vehicles_[static_cast<size_t>(id)];
      if (v.version != ver) return;
      v.dwelling = false;
      drive_to_next_stop(v, sim_->now());
    });
  }

  void become_idle(Veh& v, Time now) {
    if (v.soc < cfg_->charge_below_soc && !scen_->chargers.empty() && !v.charging) {
      dispatch_to_charger(v, now);
      return;
    }
    v.charging = false;
  }

  void dispatch_to_charger(Veh& v, Time now) {
    int best = -1;
    double best_t = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < scen_->chargers.size(); ++c) {
      if (scen_->chargers[c].link < 0) continue;
      double t = planner_.drive_time(v.link, scen_->chargers[c].link, now);
      if (t < best_t - 1e-9) {
        best_t = t;
        best = static_cast<int>(c);
      }
    }
    if (best < 0) return;  // nowhere to charge; stays idle
    v.charging = true;
    DrtStopPlan stop;
    stop.kind = DrtStopKind::charge;
    stop.link = scen_->chargers[best].link;
    stop.charger = best;
    v.stops.push_back(stop);
    rebuild_motion(v, now);
  }

  void request_plug(Veh& v, int charger, Time now) {
    ChargerState& cs = chargers_[static_cast<size_t>(charger)];
    if (cs.busy_plugs < scen_->chargers[static_cast<size_t>(charger)].plugs) {
      start_charge(v, charger, now);
    } else {
      cs.queue.push_back(v.id);
      log_task(v, "charge_wait", now, now, v.link);
    }
  }

  void start_charge(Veh& v, int charger, Time now) {
    ChargerState& cs = chargers_[static_cast<size_t>(charger)];
    cs.busy_plugs += 1;
    v.plugged = true;
    charge_sessions_ += 1;
    double minutes = std::max(0.0, cfg_->charge_to_soc - v.soc) / cfg_->charge_rate_pct_per_min;
    v.busy_until = now + minutes * 60.0;
    emit_vehicle_event(EventKind::charge_start, v, now, v.link, -1,
                       scen_->chargers[static_cast<size_t>(charger)].id);
    log_task(v, "charge", now, v.busy_until, v.link);
    const int ver = v.version;
    sim_->at(v.busy_until, [this, id = v.id, ver, charger] {
      Veh& v = vehicles_[static_cast<size_t>(id)];
      if (v.version != ver) return;
      Time now = sim_->now();
      v.soc = cfg_->charge_to_soc;
      v.plugged = false;
      v.charging = false;
      emit_vehicle_event(EventKind::charge_end, v, now, v.link, -1,
                         scen_->chargers[static_cast<size_t>(charger)].id);
      ChargerState& cs = chargers_[static_cast<size_t>(charger)];
      cs.busy_plugs -= 1;
      if (!cs.queue.empty()) {
        int next = cs.queue.front();
        cs.queue.erase(cs.queue.begin());
        start_charge(vehicles_[static_cast<size_t>(next)], charger, now);
      }
      become_idle(v, now);
    });
  }

  bool is_idle(const Veh& v) const {
    return !v.stranded && !v.charging && !v.dwelling && !v.driving && v.stops.empty() &&
           v.onboard.empty();
  }

  int zone_rep_link(int zone) {
    auto it = zone_rep_.find(zone);
    if (it != zone_rep_.end()) return it->second;
    int l = scen_->network.nearest_link(zones_.centroid(zone), Mode::car);
    zone_rep_[zone] = l;
    return l;
  }

  // Min-cost-flow relocation toward the previous iteration's demand pattern;
  // leftover surplus vehicles return to the depot.
  void rebalance_tick(Time now) {
    int slot = static_cast<int>(std::floor(now / reb_->interval_s));
    std::map<int, std::vector<int>> idle_by_zone;
    for (const Veh& v : vehicles_)
      if (is_idle(v))
        idle_by_zone[zones_.zone_of(scen_->network.link_midpoint(v.link))].push_back(v.id);

    std::map<int, int> target;
    for (const auto& [key, count] : expected_) {
      if (key.second != slot || count <= 0) continue;
      target[key.first] =
          static_cast<int>(std::ceil(reb_->target_alpha * count + reb_->target_beta));
    }

    std::vector<std::pair<int, int>> surplus, deficit;  // zone, amount
    for (const auto& [zone, vehs] : idle_by_zone) {
      int t = target.count(zone) ? target[zone] : 0;
      int s = static_cast<int>(vehs.size()) - t;
      if (s > 0) surplus.push_back({zone, s});
    }
    for (const auto& [zone, t] : target) {
      int have = idle_by_zone.count(zone) ? static_cast<int>(idle_by_zone[zone].size()) : 0;
      if (t > have) deficit.push_back({zone, t - have});
    }

    std::map<int, int> outflow;  // surplus zone -> vehicles sent
    if (!surplus.empty() && !deficit.empty()) {
      int n = static_cast<int>(surplus.size() + deficit.size()) + 2;
      MinCostFlow mcf(n);
      int s_node = n - 2, t_node = n - 1;
      std::vector<std::vector<int>> pair_edge(surplus.size(),
                                              std::vector<int>(deficit.size(), -1));
      for (size_t a = 0; a < surplus.size(); ++a)
        mcf.add_edge(s_node, static_cast<int>(a), surplus[a].second, 0);
      for (size_t b = 0; b < deficit.size(); ++b)
        mcf.add_edge(static_cast<int>(surplus.size() + b), t_node, deficit[b].second, 0);
      for (size_t a = 0; a < surplus.size(); ++a) {
        int ra = zone_rep_link(surplus[a].first);
        for (size_t b = 0; b < deficit.size(); ++b) {
          int rb = zone_rep_link(deficit[b].first);
          double t = planner_.drive_time(ra, rb, now);
          if (!std::isfinite(t)) continue;
          pair_edge[a][b] = mcf.add_edge(static_cast<int>(a),
                                         static_cast<int>(surplus.size() + b),
                                         std::min(surplus[a].second, deficit[b].second),
                                         static_cast<std::int64_t>(std::llround(t)));
        }
      }
      mcf.solve(s_node, t_node);
      for (size_t a = 0; a < surplus.size(); ++a) {
        auto& pool = idle_by_zone[surplus[a].first];
        std::sort(pool.begin(), pool.end());
        size_t taken = 0;
        for (size_t b = 0; b < deficit.size(); ++b) {
          if (pair_edge[a][b] < 0) continue;
          std::int64_t f = mcf.flow_on(pair_edge[a][b]);
          int dest = zone_rep_link(deficit[b].first);
          for (std::int64_t k = 0; k < f && taken < pool.size(); ++k) {
            Veh& v = vehicles_[static_cast<size_t>(pool[taken++])];
            send_relocation(v, dest, now);
          }
        }
        outflow[surplus[a].first] = static_cast<int>(taken);
        pool.erase(pool.begin(), pool.begin() + taken);
      }
    }

    // Unneeded idle vehicles in surplus zones head back to the depot.
    int depot = resolve_depot();
    for (const auto& [zone, extra] : surplus) {
      int remaining = extra - (outflow.count(zone) ? outflow[zone] : 0);
      if (remaining <= 0) continue;
      auto& pool = idle_by_zone[zone];
      std::sort(pool.begin(), pool.end());
      for (int k = 0; k < remaining && k < static_cast<int>(pool.size()); ++k) {
        Veh& v = vehicles_[static_cast<size_t>(pool[static_cast<size_t>(k)])];
        if (v.link == depot) continue;
        send_relocation(v, depot, now);
      }
    }
  }

  void send_relocation(Veh& v, int dest_link, Time now) {
    if (v.link == dest_link) return;
    DrtStopPlan stop;
    stop.kind = DrtStopKind::relocate;
    stop.link = dest_link;
    v.stops.assign(1, stop);
    relocations_ += 1;
    log_task(v, "relocate", now, now, dest_link);
    rebuild_motion(v, now);
  }

  const Scenario* scen_;
  const DrtConfig* cfg_;
  const RebalancingConfig* reb_;
  const TravelTimeEstimates* estimates_;
  DrtPlanner planner_;
  ZoneGrid zones_;
  QueueSim* sim_ = nullptr;

  std::vector<Veh> vehicles_;
  std::vector<ChargerState> chargers_;
  std::vector<DrtRequestRecord> requests_;
  std::vector<FleetLogRow> log_;
  std::map<std::pair<int, int>, int> expected_;
  std::map<int, int> zone_rep_;
  int relocations_ = 0;
  int charge_sessions_ = 0;
};

}  // namespace daytrip
