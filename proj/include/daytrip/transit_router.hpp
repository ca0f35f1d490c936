#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/scenario.hpp"

namespace daytrip {

struct TransitRouterConfig {
  double max_access_distance_m = 1500.0;  // beeline to first/last stop
  double transfer_distance_m = 250.0;     // beeline between stops on foot
  double walk_speed = 1.0;                // m/s
  double beeline_factor = 1.3;
  int max_rounds = 3;                     // boardings, so max_rounds-1 transfers
};

struct PtRideSegment {
  int route = -1;       // index into TransitSchedule::routes
  int departure = -1;   // index into route departures
  int board_stop = -1;  // index into the route's stop sequence
  int alight_stop = -1;
  Time board_time = 0;  // departure_offset-based
  Time alight_time = 0;
};

struct PtItinerary {
  bool feasible = false;
  double access_walk_s = 0;
  double egress_walk_s = 0;
  Time arrival = 0;
  std::vector<PtRideSegment> segments;
};

// Round-based earliest-arrival search over the timetable (boardings per
// round, footpath relaxation between rounds). Deterministic: routes scanned
// in index order, departures ascending, strict improvements only.
class TransitRouter {
 public:
  TransitRouter(const Network& network, const TransitSchedule& schedule,
                TransitRouterConfig cfg = {})
      : net_(&network), sched_(&schedule), cfg_(cfg) {
    route_stops_.resize(schedule.routes.size());
    std::map<std::string, int> stop_index;
    for (size_t r = 0; r < schedule.routes.size(); ++r) {
      const auto& route = schedule.routes[r];
      for (size_t s = 0; s < route.stops.size(); ++s) {
        const auto& st = route.stops[s];
        auto [it, inserted] = stop_index.try_emplace(st.stop_id, static_cast<int>(stops_.size()));
        if (inserted) {
          PhysStop ps;
          ps.id = st.stop_id;
          ps.location = network.link_midpoint(st.link);
          stops_.push_back(ps);
        }
        stops_[it->second].served_by.push_back({static_cast<int>(r), static_cast<int>(s)});
        route_stops_[r].push_back(it->second);
      }
    }
  }

  double walk_time(const Point& a, const Point& b) const {
    return cfg_.beeline_factor * euclidean(a, b) / cfg_.walk_speed;
  }

  PtItinerary route(const Point& origin, const Point& destination, Time depart) const {
    PtItinerary out;
    const size_t S = stops_.size();
    if (S == 0) return out;

    constexpr double kInf = std::numeric_limits<double>::infinity();
    struct Label {
      double tau = std::numeric_limits<double>::infinity();
      int parent_stop = -1;  // physical stop the ride was boarded at
      PtRideSegment via;
      int from_round = -1;   // -1 means inherited from the previous round
    };
    std::vector<std::vector<Label>> rounds(cfg_.max_rounds + 1,
                                           std::vector<Label>(S));

    // Round 0: access walk.
    for (size_t s = 0; s < S; ++s) {
      double beeline = euclidean(origin, stops_[s].location);
      if (beeline <= cfg_.max_access_distance_m)
        rounds[0][s].tau = depart + walk_time(origin, stops_[s].location);
    }

    for (int k = 1; k <= cfg_.max_rounds; ++k) {
      rounds[k] = rounds[k - 1];
      for (size_t s = 0; s < S; ++s) rounds[k][s].from_round = -1;
      // Ride relaxation.
      for (size_t r = 0; r < sched_->routes.size(); ++r) {
        const auto& route = sched_->routes[r];
        for (size_t d = 0; d < route.departures.size(); ++d) {
          Time dep0 = route.departures[d];
          int boarded_at = -1;
          Time board_time = 0;
          for (size_t s = 0; s < route.stops.size(); ++s) {
            int phys = route_stops_[r][s];
            Time stop_dep = dep0 + route.stops[s].departure_offset;
            Time stop_arr = dep0 + route.stops[s].arrival_offset;
            if (boarded_at >= 0) {
              Label& lbl = rounds[k][phys];
              if (stop_arr < lbl.tau) {
                lbl.tau = stop_arr;
                lbl.parent_stop = route_stops_[r][boarded_at];
                lbl.via = {static_cast<int>(r), static_cast<int>(d),
                           boarded_at, static_cast<int>(s), board_time, stop_arr};
                lbl.from_round = k - 1;
              }
            }
            if (boarded_at < 0 && rounds[k - 1][phys].tau <= stop_dep) {
              boarded_at = static_cast<int>(s);
              board_time = stop_dep;
            }
          }
        }
      }
      // Footpath relaxation from stops reached by a ride this round. Labels
      // inherited from earlier rounds already had their footpaths applied.
      std::vector<Label> base = rounds[k];
      for (size_t p = 0; p < S; ++p) {
        if (base[p].tau == kInf || base[p].from_round != k - 1) continue;
        for (size_t q = 0; q < S; ++q) {
          if (p == q) continue;
          double beeline = euclidean(stops_[p].location, stops_[q].location);
          if (beeline > cfg_.transfer_distance_m) continue;
          double t = base[p].tau + walk_time(stops_[p].location, stops_[q].location);
          if (t < rounds[k][q].tau) {
            rounds[k][q] = base[p];
            rounds[k][q].tau = t;
          }
        }
      }
    }

    // Egress: best stop over all rounds.
    double best_total = kInf;
    int best_stop = -1, best_round = -1;
    for (int k = 1; k <= cfg_.max_rounds; ++k) {
      for (size_t s = 0; s < S; ++s) {
        if (rounds[k][s].tau == kInf) continue;
        if (rounds[k][s].from_round == -1 && k > 0 &&
            rounds[k][s].tau == rounds[k - 1][s].tau)
          continue;  // value copied from the previous round, skip duplicates
        double beeline = euclidean(stops_[s].location, destination);
        if (beeline > cfg_.max_access_distance_m) continue;
        double total = rounds[k][s].tau + walk_time(stops_[s].location, destination);
        if (total < best_total) {
          best_total = total;
          best_stop = static_cast<int>(s);
          best_round = k;
        }
      }
    }
    if (best_stop < 0) return out;

    // Reconstruct ride segments back through the rounds.
    std::vector<PtRideSegment> segs;
    int stop = best_stop, k = best_round;
    while (k > 0 && stop >= 0) {
      const Label& lbl = rounds[k][stop];
      if (lbl.from_round == -1) {
        --k;  // label inherited from the previous round
        continue;
      }
      segs.push_back(lbl.via);
      stop = lbl.parent_stop;
      k = lbl.from_round;
    }
    std::reverse(segs.begin(), segs.end());
    if (segs.empty()) return out;

    out.feasible = true;
    out.segments = std::move(segs);
    int first_board = route_stops_[out.segments.front().route][out.segments.front().board_stop];
    out.access_walk_s = walk_time(origin, stops_[first_board].location);
    out.egress_walk_s = walk_time(stops_[best_stop].location, destination);
    out.arrival = best_total;
    return out;
  }

  const Point& stop_location(int route, int stop_seq) const {
    return stops_[route_stops_[route][stop_seq]].location;
  }

 private:
  struct PhysStop {
    std::string id;
    Point location;
    std::vector<std::pair<int, int>> served_by;  // (route, seq)
  };

  const Network* net_;
  const TransitSchedule* sched_;
  TransitRouterConfig cfg_;
  std::vector<PhysStop> stops_;
  std::vector<std::vector<int>> route_stops_;  // route -> seq -> phys stop
};

}  // namespace daytrip
