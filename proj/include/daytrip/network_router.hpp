#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/scenario.hpp"

namespace daytrip {

// Congested link travel times observed in a previous run, binned by entry
// time. Unobserved bins fall back to free flow.
class TravelTimeEstimates {
 public:
  TravelTimeEstimates() = default;
  TravelTimeEstimates(size_t links, Time bin_size, Time horizon)
      : bin_size_(bin_size), bins_(static_cast<size_t>(std::ceil(horizon / bin_size))),
        sum_(links * bins_, 0.0), count_(links * bins_, 0) {}

  bool empty() const { return sum_.empty(); }

  void record(size_t link, Time entry, double travel_time) {
    if (empty()) return;
    size_t b = bin(entry);
    sum_[link * bins_ + b] += travel_time;
    ++count_[link * bins_ + b];
  }

  // Average observed time, or fallback when the bin is empty.
  double get(size_t link, Time entry, double freeflow) const {
    if (empty()) return freeflow;
    size_t b = bin(entry);
    auto c = count_[link * bins_ + b];
    return c > 0 ? sum_[link * bins_ + b] / c : freeflow;
  }

 private:
  size_t bin(Time t) const {
    auto b = static_cast<long>(std::floor(t / bin_size_));
    if (b < 0) b = 0;
    if (b >= static_cast<long>(bins_)) b = static_cast<long>(bins_) - 1;
    return static_cast<size_t>(b);
  }

  Time bin_size_ = 900;
  size_t bins_ = 0;
  std::vector<double> sum_;
  std::vector<long> count_;
};

inline double link_freeflow(const NetworkLink& l) { return l.length / l.freespeed; }

// Time-dependent link-to-link shortest path for a network mode. Labels are
// set on links (arrival time at the link's downstream end); the path includes
// both the origin and the destination link, fully traversed. Deterministic
// tie-break: smaller link index first.
class CarRouter {
 public:
  CarRouter(const Network& network, Mode mode = Mode::car)
      : net_(&network), mode_(mode) {}

  // Returns the link-index path origin..destination, or empty if unreachable.
  std::vector<int> route(int origin_link, int destination_link, Time depart,
                         const TravelTimeEstimates& estimates) const {
    const auto& links = net_->links;
    const size_t n = links.size();
    if (origin_link < 0 || destination_link < 0) return {};
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<int> parent(n, -1);

    using Entry = std::pair<double, int>;  // arrival at link end, link index
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

    if (!links[origin_link].allows(mode_)) return {};
    double t0 = depart + estimates.get(origin_link, depart, link_freeflow(links[origin_link]));
    best[origin_link] = t0;
    open.push({t0, origin_link});

    while (!open.empty()) {
      auto [t, l] = open.top();
      open.pop();
      if (t > best[l]) continue;
      if (l == destination_link) break;
      int to_node = links[l].to_node;
      if (to_node < 0) continue;
      for (int m : net_->out_links[to_node]) {
        if (!links[m].allows(mode_)) continue;
        double tm = t + estimates.get(m, t, link_freeflow(links[m]));
        if (tm < best[m]) {
          best[m] = tm;
          parent[m] = l;
          open.push({tm, m});
        }
      }
    }
    if (!std::isfinite(best[destination_link])) return {};
    std::vector<int> path;
    for (int l = destination_link; l != -1; l = parent[l]) path.push_back(l);
    std::reverse(path.begin(), path.end());
    if (path.front() != origin_link) return {};
    return path;
  }

  // Estimated drive time along the route produced above.
  double route_time(const std::vector<int>& path, Time depart,
                    const TravelTimeEstimates& estimates) const {
    double t = depart;
    for (int l : path) t += estimates.get(l, t, link_freeflow(net_->links[l]));
    return t - depart;
  }

 private:
  const Network* net_;
  Mode mode_;
};

}  // namespace daytrip
