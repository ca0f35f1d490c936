#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/events.hpp"
#include "daytrip/network_router.hpp"
#include "daytrip/plans.hpp"
#include "daytrip/scenario.hpp"
#include "daytrip/transit_router.hpp"

namespace daytrip {

struct SimulationConfig {
  double flow_capacity_factor = 0.25;
  double storage_capacity_factor = 0.5;
  Time end_time = 30 * 3600.0;  // 24h day plus 6h grace
  double teleport_beeline_factor = 1.3;
  std::map<Mode, double> teleport_speeds = {{Mode::walk, 1.0}, {Mode::bike, 2.0}};
  double car_length_m = 7.5;
  double infinite_flow_capacity = 1e9;  // veh/h at or above which a link is unconstrained
  TransitRouterConfig transit;

  double teleport_speed(Mode m) const {
    auto it = teleport_speeds.find(m);
    if (it == teleport_speeds.end() || it->second <= 0)
      throw Error("no teleport speed for mode " + std::string(mode_name(m)));
    return it->second;
  }
};

inline std::pair<double, double> teleport_leg(const Point& origin, const Point& destination,
                                              Mode mode, const SimulationConfig& cfg) {
  double distance = cfg.teleport_beeline_factor * euclidean(origin, destination);
  return {distance / cfg.teleport_speed(mode), distance};
}

// One simulated traveler: a selected plan plus the attributes the engine needs.
struct SimAgentSpec {
  PersonId person = -1;
  const DailyPlan* plan = nullptr;
  bool has_license = false;
  bool senior = false;
};

class QueueSim;

// Dispatch interface the AMoD engine implements; the sim calls on_request when
// an agent submits, and the dispatcher drives everything else through
// QueueSim's scheduling and completion hooks.
struct DrtDispatch {
  virtual ~DrtDispatch() = default;
  virtual void on_prepare(QueueSim& sim) = 0;  // called once before the day starts
  virtual void on_request(QueueSim& sim, PersonId person, int origin_link, int dest_link,
                          const Point& origin, const Point& destination, Time now) = 0;
  virtual void on_day_end(QueueSim& sim, Time now) = 0;
};

struct SimulationSummary {
  int departures = 0;
  int arrivals = 0;
  int stuck = 0;
  int pt_walk_fallbacks = 0;
  int drt_rejections = 0;
};

// Event-driven spatial-queue network simulation: free-flow delay, capacity-
// limited outflow, finite storage with spillback, FIFO links. Walk and bike
// teleport; transit runs on its timetable; car and ride traverse the queue
// (ride as a zero-load phantom). Deterministic: the engine queue is ordered
// by (time, step type, ids, sequence number).
class QueueSim {
 public:
  QueueSim(const Scenario& scenario, const SimulationConfig& cfg,
           const TravelTimeEstimates& estimates)
      : scen_(&scenario), cfg_(&cfg), estimates_(&estimates),
        router_(scenario.network, Mode::car),
        transit_router_(scenario.network, scenario.transit, cfg.transit) {
    links_.resize(scenario.network.links.size());
    for (size_t i = 0; i < scenario.facilities.size(); ++i)
      facility_by_id_[scenario.facilities[i].id] = &scenario.facilities[i];
  }

  void set_drt(DrtDispatch* drt) { drt_ = drt; }

  std::vector<Event> run(const std::vector<SimAgentSpec>& specs, SimulationSummary* summary = nullptr) {
    agents_.clear();
    events_.clear();
    seq_ = 0;
    now_ = 0;
    for (auto& l : links_) l = LinkState{};
    agents_.reserve(specs.size());
    for (const auto& s : specs) {
      Agent a;
      a.spec = s;
      agents_.push_back(std::move(a));
    }
    std::sort(agents_.begin(), agents_.end(),
              [](const Agent& x, const Agent& y) { return x.spec.person < y.spec.person; });
    for (size_t i = 0; i < agents_.size(); ++i) person_agent_[agents_[i].spec.person] = i;

    spawn_transit_vehicles();
    if (drt_) drt_->on_prepare(*this);
    for (size_t i = 0; i < agents_.size(); ++i) start_agent(i);

    while (!queue_.empty()) {
      Step step = queue_.top();
      if (step.t > cfg_->end_time) break;
      queue_.pop();
      now_ = step.t;
      dispatch(step);
    }
    now_ = cfg_->end_time;
    if (drt_) drt_->on_day_end(*this, now_);
    end_sweep();

    SimulationSummary s;
    for (const auto& e : events_) {
      if (e.kind == EventKind::depart) ++s.departures;
      if (e.kind == EventKind::arrive) ++s.arrivals;
      if (e.kind == EventKind::stuck && e.person >= 0) ++s.stuck;
      if (e.kind == EventKind::drt_reject) ++s.drt_rejections;
    }
    s.pt_walk_fallbacks = pt_walk_fallbacks_;
    if (summary) *summary = s;

    sort_events(events_);
    return std::move(events_);
  }

  // --- hooks for the DRT engine -------------------------------------------

  Time now() const { return now_; }
  const Scenario& scenario() const { return *scen_; }
  const SimulationConfig& config() const { return *cfg_; }
  const TravelTimeEstimates& estimates() const { return *estimates_; }
  const CarRouter& router() const { return router_; }

  void at(Time t, std::function<void()> fn) {
    callbacks_.push_back(std::move(fn));
    push(t, StepType::callback, static_cast<std::int64_t>(callbacks_.size() - 1), 0);
  }

  void emit(Event e) { events_.push_back(std::move(e)); }

  // Consumes flow capacity on a link at the current time without joining the
  // queue (scheduled AMoD motion).
  void flow_pulse(int link, double pce) {
    LinkState& L = links_[link];
    if (!flow_constrained(link) || pce <= 0) return;
    L.next_flow_time = std::max(L.next_flow_time, now_) + pce / flow_rate(link);
  }

  // Emits the depart for an accepted request (rejected requests never depart,
  // keeping departures = arrivals + stuck).
  void drt_accepted(PersonId person, int origin_link) {
    size_t idx = person_agent_.at(person);
    Agent& a = agents_[idx];
    Event e;
    e.time = now_;
    e.kind = EventKind::depart;
    e.person = person;
    e.mode = mode_name(Mode::amod);
    if (origin_link >= 0) e.link = link_id(origin_link);
    emit(std::move(e));
    (void)a;
  }

  // An accepted trip the fleet can no longer serve (stranded vehicle): the
  // open leg ends stuck and the agent continues with the next activity.
  void drt_failed(PersonId person) {
    size_t idx = person_agent_.at(person);
    Agent& a = agents_[idx];
    Event e;
    e.time = now_;
    e.kind = EventKind::stuck;
    e.person = person;
    e.mode = mode_name(Mode::amod);
    e.info = "stranded_vehicle";
    emit(std::move(e));
    a.traveling = false;
    begin_activity(idx, a.leg + 1);
  }

  void drt_completed(PersonId person, double distance) {
    size_t idx = person_agent_.at(person);
    Agent& a = agents_[idx];
    Event e;
    e.time = now_;
    e.kind = EventKind::arrive;
    e.person = person;
    e.mode = mode_name(Mode::amod);
    e.distance = distance;
    emit(std::move(e));
    a.traveling = false;
    begin_activity(idx, a.leg + 1);
  }

  void drt_rejected(PersonId person) {
    size_t idx = person_agent_.at(person);
    Agent& a = agents_[idx];
    a.rejected_legs.push_back(a.leg);
    a.traveling = false;
    // The agent skips the trip and performs the next activity late.
    begin_activity(idx, a.leg + 1);
  }

  int facility_link(const std::string& facility_id) const {
    auto it = facility_by_id_.find(facility_id);
    if (it == facility_by_id_.end()) throw Error("unknown facility " + facility_id);
    return it->second->link;
  }

  // Per-agent rejected-leg indices from the finished run (stuck scoring).
  std::map<PersonId, std::vector<int>> rejected_legs() const {
    std::map<PersonId, std::vector<int>> out;
    for (const auto& a : agents_)
      if (!a.rejected_legs.empty()) out[a.spec.person] = a.rejected_legs;
    return out;
  }

 private:
  // Engine step ordering at equal times; the enum order is the tie-break.
  enum class StepType : int {
    activity_end = 0,
    link_wake = 1,
    agent_at_stop = 2,
    transit_arrive = 3,
    transit_depart = 4,
    teleport_arrive = 5,
    callback = 6,
  };

  struct Step {
    Time t = 0;
    StepType type = StepType::activity_end;
    std::int64_t a = 0;
    std::int64_t b = 0;
    std::uint64_t seq = 0;

    bool operator>(const Step& o) const {
      if (t != o.t) return t > o.t;
      if (type != o.type) return type > o.type;
      if (a != o.a) return a > o.a;
      if (b != o.b) return b > o.b;
      return seq > o.seq;
    }
  };

  struct QVeh {
    size_t agent = 0;
    Time ready = 0;       // entry + free-flow time
    double eff_len = 0;   // storage footprint, meters
    double pce = 1.0;     // flow footprint
  };

  struct Entrant {
    Time t = 0;
    size_t agent = 0;
  };

  struct LinkState {
    std::deque<QVeh> q;
    double occupied = 0;
    Time next_flow_time = -1e18;
    std::deque<Entrant> entry_queue;
    std::set<int> blocked_upstream;
  };

  struct Agent {
    SimAgentSpec spec;
    size_t act = 0;           // index of the current activity
    int leg = -1;             // index of the leg in progress
    bool traveling = false;
    bool done = false;
    bool stuck_flagged = false;
    bool pt_fallback = false;
    Time next_end = 0;
    Mode leg_mode = Mode::walk;
    std::vector<int> route;   // car/ride link path
    size_t route_pos = 0;
    double leg_distance = 0;
    // Transit state
    PtItinerary itinerary;
    size_t pt_seg = 0;
    double pt_distance = 0;
    std::vector<int> rejected_legs;
  };

  struct TransitVeh {
    int route = -1;
    int dep_index = -1;
    Time dep0 = 0;
    int onboard = 0;
    std::vector<std::pair<size_t, int>> riders;  // agent, alight seq
  };

  // --- engine plumbing -----------------------------------------------------

  void push(Time t, StepType type, std::int64_t a, std::int64_t b) {
    queue_.push({t, type, a, b, seq_++});
  }

  void dispatch(const Step& s) {
    switch (s.type) {
      case StepType::activity_end: on_activity_end(static_cast<size_t>(s.a)); break;
      case StepType::link_wake: attempt_exit(static_cast<int>(s.a)); break;
      case StepType::agent_at_stop: on_agent_at_stop(static_cast<size_t>(s.a)); break;
      case StepType::transit_arrive:
        on_transit_arrive(static_cast<size_t>(s.a), static_cast<int>(s.b));
        break;
      case StepType::transit_depart:
        on_transit_depart(static_cast<size_t>(s.a), static_cast<int>(s.b));
        break;
      case StepType::teleport_arrive: on_teleport_arrive(static_cast<size_t>(s.a)); break;
      case StepType::callback: callbacks_[static_cast<size_t>(s.a)](); break;
    }
  }

  // --- agent lifecycle ------------------------------------------------------

  void start_agent(size_t idx) {
    Agent& a = agents_[idx];
    const auto& acts = a.spec.plan->activities;
    if (acts.size() == 1) {
      a.done = true;  // stays home all day
      return;
    }
    schedule_activity_end(idx, std::max<Time>(0, acts[0].end_time));
  }

  void schedule_activity_end(size_t idx, Time t) {
    push(t, StepType::activity_end, static_cast<std::int64_t>(idx), 0);
    agents_[idx].next_end = t;
  }

  void on_activity_end(size_t idx) {
    Agent& a = agents_[idx];
    if (a.done || a.traveling) return;
    const auto& acts = a.spec.plan->activities;
    const auto& act = acts[a.act];

    Event e;
    e.time = now_;
    e.kind = EventKind::act_end;
    e.person = a.spec.person;
    e.facility = act.facility;
    e.info = activity_type_name(act.type);
    emit(std::move(e));

    a.leg += 1;
    a.traveling = true;
    const PlanLeg& leg = a.spec.plan->legs[a.leg];
    a.leg_mode = leg.mode;
    start_leg(idx, leg, act, acts[a.act + 1]);
  }

  void emit_depart(const Agent& a, const std::string& link_id) {
    Event e;
    e.time = now_;
    e.kind = EventKind::depart;
    e.person = a.spec.person;
    e.mode = mode_name(a.leg_mode);
    e.link = link_id;
    emit(std::move(e));
  }

  void start_leg(size_t idx, const PlanLeg& leg, const PlanActivity& from,
                 const PlanActivity& to) {
    Agent& a = agents_[idx];
    switch (leg.mode) {
      case Mode::walk:
      case Mode::bike: {
        emit_depart(a, "");
        auto [tt, dist] = teleport_leg(from.location, to.location, leg.mode, *cfg_);
        a.leg_distance = dist;
        push(now_ + tt, StepType::teleport_arrive, static_cast<std::int64_t>(idx), 0);
        break;
      }
      case Mode::car:
      case Mode::ride: {
        int o = facility_link(from.facility);
        int d = facility_link(to.facility);
        a.route = resolve_route(leg, o, d);
        if (a.route.empty()) {
          emit_depart(a, link_id(o));
          flag_stuck(idx, "no_route");
          return;
        }
        a.route_pos = 0;
        a.leg_distance = 0;
        for (int l : a.route) a.leg_distance += scen_->network.links[l].length;
        emit_depart(a, link_id(a.route.front()));
        enter_network(idx, a.route.front());
        break;
      }
      case Mode::pt: {
        emit_depart(a, "");
        a.itinerary = transit_router_.route(from.location, to.location, now_);
        if (!a.itinerary.feasible) {
          ++pt_walk_fallbacks_;
          auto [tt, dist] = teleport_leg(from.location, to.location, Mode::walk, *cfg_);
          a.leg_distance = dist;
          a.pt_fallback = true;
          push(now_ + tt, StepType::teleport_arrive, static_cast<std::int64_t>(idx), 0);
          break;
        }
        a.pt_fallback = false;
        a.pt_seg = 0;
        a.pt_distance =
            a.itinerary.access_walk_s * cfg_->teleport_speed(Mode::walk);
        push(now_ + a.itinerary.access_walk_s, StepType::agent_at_stop,
             static_cast<std::int64_t>(idx), 0);
        break;
      }
      case Mode::amod: {
        Event e;
        e.time = now_;
        e.kind = EventKind::drt_request;
        e.person = a.spec.person;
        e.mode = mode_name(Mode::amod);
        emit(std::move(e));
        if (!drt_) {
          Event r;
          r.time = now_;
          r.kind = EventKind::drt_reject;
          r.person = a.spec.person;
          r.info = "no_fleet";
          emit(std::move(r));
          drt_rejected(a.spec.person);
          return;
        }
        drt_->on_request(*this, a.spec.person, facility_link(from.facility),
                         facility_link(to.facility), from.location, to.location, now_);
        break;
      }
    }
  }

  std::vector<int> resolve_route(const PlanLeg& leg, int o, int d) {
    if (!leg.route.empty()) {
      std::vector<int> r;
      r.reserve(leg.route.size());
      for (const auto& id : leg.route) {
        auto it = scen_->network.link_index.find(id);
        if (it == scen_->network.link_index.end()) return {};
        r.push_back(it->second);
      }
      return r;
    }
    if (o < 0 || d < 0) return {};
    return router_.route(o, d, now_, *estimates_);
  }

  const std::string& link_id(int l) const { return scen_->network.links[l].id; }

  void begin_activity(size_t idx, int next_leg) {
    Agent& a = agents_[idx];
    a.act += 1;
    const auto& acts = a.spec.plan->activities;
    const auto& act = acts[a.act];

    Event e;
    e.time = now_;
    e.kind = EventKind::act_start;
    e.person = a.spec.person;
    e.facility = act.facility;
    e.info = activity_type_name(act.type);
    emit(std::move(e));

    if (a.act + 1 == acts.size()) {
      a.done = true;
      return;
    }
    schedule_activity_end(idx, std::max(act.end_time, now_ + 1.0));
    (void)next_leg;
  }

  void emit_arrive(size_t idx, double distance) {
    Agent& a = agents_[idx];
    Event e;
    e.time = now_;
    e.kind = EventKind::arrive;
    e.person = a.spec.person;
    e.mode = mode_name(a.leg_mode);
    e.distance = distance;
    if (a.pt_fallback && a.leg_mode == Mode::pt) e.info = "walk_fallback";
    emit(std::move(e));
    a.traveling = false;
    begin_activity(idx, a.leg + 1);
  }

  void on_teleport_arrive(size_t idx) { emit_arrive(idx, agents_[idx].leg_distance); }

  void flag_stuck(size_t idx, const std::string& why) {
    Agent& a = agents_[idx];
    if (a.stuck_flagged) return;
    a.stuck_flagged = true;
    a.done = true;
    Event e;
    e.time = now_;
    e.kind = EventKind::stuck;
    e.person = a.spec.person;
    e.mode = mode_name(a.leg_mode);
    e.info = why;
    emit(std::move(e));
  }

  // --- queue network --------------------------------------------------------

  double flow_rate(int l) const {
    return scen_->network.links[l].flow_capacity * cfg_->flow_capacity_factor / 3600.0;
  }

  bool flow_constrained(int l) const {
    return scen_->network.links[l].flow_capacity < cfg_->infinite_flow_capacity;
  }

  double storage_len(int l) const {
    const auto& link = scen_->network.links[l];
    return std::max(link.length * link.storage_lanes * cfg_->storage_capacity_factor,
                    cfg_->car_length_m);
  }

  double eff_len(const Agent& a) const {
    return a.leg_mode == Mode::ride ? 0.0 : cfg_->car_length_m;
  }

  double veh_pce(const Agent& a) const { return a.leg_mode == Mode::ride ? 0.0 : 1.0; }

  bool fits(int l, double eff) const {
    return links_[l].occupied + eff <= storage_len(l) + 1e-9;
  }

  void enter_network(size_t idx, int link) {
    Agent& a = agents_[idx];
    if (fits(link, eff_len(a))) {
      place_on_link(idx, link);
    } else {
      links_[link].entry_queue.push_back({now_, idx});
    }
  }

  void place_on_link(size_t idx, int l) {
    Agent& a = agents_[idx];
    LinkState& L = links_[l];
    Event e;
    e.time = now_;
    e.kind = EventKind::link_enter;
    e.person = a.spec.person;
    e.mode = mode_name(a.leg_mode);
    e.link = link_id(l);
    emit(std::move(e));
    QVeh v;
    v.agent = idx;
    v.ready = now_ + link_freeflow(scen_->network.links[l]);
    v.eff_len = eff_len(a);
    v.pce = veh_pce(a);
    L.occupied += v.eff_len;
    L.q.push_back(v);
    if (L.q.size() == 1)
      push(v.ready, StepType::link_wake, l, 0);
  }

  void attempt_exit(int l) {
    LinkState& L = links_[l];
    while (!L.q.empty()) {
      QVeh head = L.q.front();
      if (head.ready > now_) {
        push(head.ready, StepType::link_wake, l, 0);
        return;
      }
      if (head.pce > 0 && flow_constrained(l) && L.next_flow_time > now_) {
        push(L.next_flow_time, StepType::link_wake, l, 0);
        return;
      }
      Agent& a = agents_[head.agent];
      const bool arriving = a.route_pos + 1 >= a.route.size();
      int next = arriving ? -1 : a.route[a.route_pos + 1];
      if (!arriving && !fits(next, head.eff_len)) {
        links_[next].blocked_upstream.insert(l);
        return;
      }

      L.q.pop_front();
      L.occupied -= head.eff_len;
      if (head.pce > 0 && flow_constrained(l))
        L.next_flow_time = std::max(L.next_flow_time, now_) + head.pce / flow_rate(l);

      Event e;
      e.time = now_;
      e.kind = EventKind::link_leave;
      e.person = a.spec.person;
      e.mode = mode_name(a.leg_mode);
      e.link = link_id(l);
      emit(std::move(e));

      if (arriving) {
        emit_arrive(head.agent, a.leg_distance);
      } else {
        a.route_pos += 1;
        place_on_link(head.agent, next);
      }
      if (head.eff_len > 0) release_space(l);
    }
  }

  // Space freed on link l: wake blocked upstream heads, then admit entrants.
  void release_space(int l) {
    LinkState& L = links_[l];
    if (!L.blocked_upstream.empty()) {
      std::vector<int> ups(L.blocked_upstream.begin(), L.blocked_upstream.end());
      std::sort(ups.begin(), ups.end(), [&](int x, int y) {
        const auto& hx = links_[x].q.front();
        const auto& hy = links_[y].q.front();
        if (hx.ready != hy.ready) return hx.ready < hy.ready;
        return agents_[hx.agent].spec.person < agents_[hy.agent].spec.person;
      });
      L.blocked_upstream.clear();
      for (int u : ups) attempt_exit(u);
    }
    while (!L.entry_queue.empty()) {
      size_t idx = L.entry_queue.front().agent;
      if (!fits(l, eff_len(agents_[idx]))) break;
      L.entry_queue.pop_front();
      place_on_link(idx, l);
    }
  }

  // --- transit ---------------------------------------------------------------

  void spawn_transit_vehicles() {
    transit_.clear();
    waiting_.clear();
    const auto& routes = scen_->transit.routes;
    waiting_.resize(routes.size());
    for (size_t r = 0; r < routes.size(); ++r) {
      waiting_[r].resize(routes[r].stops.size());
      for (size_t d = 0; d < routes[r].departures.size(); ++d) {
        TransitVeh v;
        v.route = static_cast<int>(r);
        v.dep_index = static_cast<int>(d);
        v.dep0 = routes[r].departures[d];
        size_t vid = transit_.size();
        transit_.push_back(std::move(v));
        for (size_t s = 0; s < routes[r].stops.size(); ++s) {
          push(routes[r].departures[d] + routes[r].stops[s].arrival_offset,
               StepType::transit_arrive, static_cast<std::int64_t>(vid),
               static_cast<std::int64_t>(s));
          push(routes[r].departures[d] + routes[r].stops[s].departure_offset,
               StepType::transit_depart, static_cast<std::int64_t>(vid),
               static_cast<std::int64_t>(s));
        }
      }
    }
  }

  std::string transit_veh_id(const TransitVeh& v) const {
    return scen_->transit.routes[v.route].id + ":" + std::to_string(v.dep_index);
  }

  void on_agent_at_stop(size_t idx) {
    Agent& a = agents_[idx];
    const PtRideSegment& seg = a.itinerary.segments[a.pt_seg];
    waiting_[seg.route][seg.board_stop].push_back({now_, idx});
  }

  void on_transit_arrive(size_t vid, int seq) {
    TransitVeh& v = transit_[vid];
    const auto& route = scen_->transit.routes[v.route];
    for (size_t i = 0; i < v.riders.size();) {
      if (v.riders[i].second == seq) {
        size_t idx = v.riders[i].first;
        v.riders.erase(v.riders.begin() + i);
        v.onboard -= 1;
        Agent& a = agents_[idx];
        Event e;
        e.time = now_;
        e.kind = EventKind::pt_alight;
        e.person = a.spec.person;
        e.link = route.stops[seq].stop_id;
        e.vehicle = transit_veh_id(v);
        emit(std::move(e));
        const PtRideSegment& seg = a.itinerary.segments[a.pt_seg];
        Point here = transit_router_.stop_location(seg.route, seq);
        a.pt_distance += euclidean(transit_router_.stop_location(seg.route, seg.board_stop), here);
        a.pt_seg += 1;
        if (a.pt_seg < a.itinerary.segments.size()) {
          const PtRideSegment& nxt = a.itinerary.segments[a.pt_seg];
          Point next_stop = transit_router_.stop_location(nxt.route, nxt.board_stop);
          double walk = transit_router_.walk_time(here, next_stop);
          a.pt_distance += cfg_->teleport_beeline_factor * euclidean(here, next_stop);
          push(now_ + walk, StepType::agent_at_stop, static_cast<std::int64_t>(idx), 0);
        } else {
          const auto& acts = a.spec.plan->activities;
          Point dest = acts[a.act + 1].location;
          double walk = transit_router_.walk_time(here, dest);
          a.pt_distance += cfg_->teleport_beeline_factor * euclidean(here, dest);
          a.leg_distance = a.pt_distance;
          push(now_ + walk, StepType::teleport_arrive, static_cast<std::int64_t>(idx), 0);
        }
      } else {
        ++i;
      }
    }
  }

  void on_transit_depart(size_t vid, int seq) {
    TransitVeh& v = transit_[vid];
    const auto& route = scen_->transit.routes[v.route];
    auto& line = waiting_[v.route][seq];
    std::stable_sort(line.begin(), line.end(), [&](const Entrant& x, const Entrant& y) {
      if (x.t != y.t) return x.t < y.t;
      return agents_[x.agent].spec.person < agents_[y.agent].spec.person;
    });
    size_t i = 0;
    while (i < line.size() && v.onboard < route.seats) {
      size_t idx = line[i].agent;
      Agent& a = agents_[idx];
      const PtRideSegment& seg = a.itinerary.segments[a.pt_seg];
      v.riders.push_back({idx, seg.alight_stop});
      v.onboard += 1;
      Event e;
      e.time = now_;
      e.kind = EventKind::pt_board;
      e.person = a.spec.person;
      e.link = route.stops[seq].stop_id;
      e.vehicle = transit_veh_id(v);
      emit(std::move(e));
      line.erase(line.begin() + i);
    }
  }

  // --- end of day -------------------------------------------------------------

  void end_sweep() {
    for (size_t i = 0; i < agents_.size(); ++i) {
      Agent& a = agents_[i];
      if (a.done || a.stuck_flagged) continue;
      if (a.traveling) {
        flag_stuck(i, "end_of_day");
      }
    }
  }

  const Scenario* scen_;
  const SimulationConfig* cfg_;
  const TravelTimeEstimates* estimates_;
  std::map<std::string, const Facility*> facility_by_id_;
  CarRouter router_;
  TransitRouter transit_router_;
  DrtDispatch* drt_ = nullptr;

  std::vector<Agent> agents_;
  std::map<PersonId, size_t> person_agent_;
  std::vector<LinkState> links_;
  std::vector<TransitVeh> transit_;
  std::vector<std::vector<std::vector<Entrant>>> waiting_;  // route -> seq -> line
  std::vector<std::function<void()>> callbacks_;
  std::priority_queue<Step, std::vector<Step>, std::greater<>> queue_;
  std::vector<Event> events_;
  std::uint64_t seq_ = 0;
  Time now_ = 0;
  int pt_walk_fallbacks_ = 0;
};

// Rebuilds per-link travel-time averages from a day's events (the between-
// iteration feedback for rerouting and DRT planning).
inline TravelTimeEstimates estimates_from_events(const std::vector<Event>& events,
                                                 const Network& network,
                                                 Time bin_size = 900.0,
                                                 Time horizon = 30 * 3600.0) {
  TravelTimeEstimates est(network.links.size(), bin_size, horizon);
  std::map<std::pair<std::string, std::int64_t>, std::pair<int, Time>> open;
  for (const auto& e : events) {
    if (e.kind != EventKind::link_enter && e.kind != EventKind::link_leave) continue;
    auto key = std::make_pair(e.vehicle, e.person);
    auto it = network.link_index.find(e.link);
    if (it == network.link_index.end()) continue;
    if (e.kind == EventKind::link_enter) {
      open[key] = {it->second, e.time};
    } else {
      auto o = open.find(key);
      if (o != open.end() && o->second.first == it->second) {
        est.record(static_cast<size_t>(it->second), o->second.second,
                   e.time - o->second.second);
        open.erase(o);
      }
    }
  }
  return est;
}

// Convenience wrapper matching the module operation signature.
inline std::vector<Event> simulate_day(const std::vector<SimAgentSpec>& agents,
                                       const Scenario& scenario, const SimulationConfig& cfg,
                                       const TravelTimeEstimates& estimates = {},
                                       DrtDispatch* drt = nullptr,
                                       SimulationSummary* summary = nullptr) {
  QueueSim sim(scenario, cfg, estimates);
  if (drt) sim.set_drt(drt);
  return sim.run(agents, summary);
}

}  // namespace daytrip
