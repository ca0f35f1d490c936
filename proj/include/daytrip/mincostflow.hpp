#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "daytrip/common.hpp"

namespace daytrip {

// Successive-shortest-paths min-cost max-flow with Johnson potentials.
// Costs must be non-negative; capacities and costs are integers.
class MinCostFlow {
 public:
  explicit MinCostFlow(int nodes) : head_(nodes, -1) {}

  static constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

  // Returns an edge id usable with flow_on().
  int add_edge(int from, int to, std::int64_t capacity, std::int64_t cost) {
    if (capacity < 0 || cost < 0) throw Error("min-cost flow needs capacity, cost >= 0");
    int id = static_cast<int>(edges_.size()) / 2;
    edges_.push_back({to, head_[from], capacity, cost});
    head_[from] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({from, head_[to], 0, -cost});
    head_[to] = static_cast<int>(edges_.size()) - 1;
    return id;
  }

  // Sends up to `limit` units from s to t; returns (flow, total cost).
  std::pair<std::int64_t, std::int64_t> solve(int s, int t, std::int64_t limit = kInf) {
    const int n = static_cast<int>(head_.size());
    std::vector<std::int64_t> potential(n, 0), dist(n);
    std::vector<int> prev_edge(n);
    std::int64_t flow = 0, cost = 0;

    while (flow < limit) {
      std::fill(dist.begin(), dist.end(), kInf);
      std::fill(prev_edge.begin(), prev_edge.end(), -1);
      dist[s] = 0;
      using Entry = std::pair<std::int64_t, int>;
      std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
      open.push({0, s});
      while (!open.empty()) {
        auto [d, u] = open.top();
        open.pop();
        if (d > dist[u]) continue;
        for (int e = head_[u]; e >= 0; e = edges_[e].next) {
          const Edge& edge = edges_[e];
          if (edge.capacity <= 0) continue;
          std::int64_t nd = d + edge.cost + potential[u] - potential[edge.to];
          if (nd < dist[edge.to]) {
            dist[edge.to] = nd;
            prev_edge[edge.to] = e;
            open.push({nd, edge.to});
          }
        }
      }
      if (dist[t] >= kInf) break;
      for (int i = 0; i < n; ++i)
        if (dist[i] < kInf) potential[i] += dist[i];

      std::int64_t push = limit - flow;
      for (int v = t; v != s;) {
        const Edge& e = edges_[prev_edge[v]];
        push = std::min(push, e.capacity);
        v = edges_[prev_edge[v] ^ 1].to;
      }
      for (int v = t; v != s;) {
        Edge& e = edges_[prev_edge[v]];
        e.capacity -= push;
        edges_[prev_edge[v] ^ 1].capacity += push;
        cost += push * e.cost;
        v = edges_[prev_edge[v] ^ 1].to;
      }
      flow += push;
    }
    return {flow, cost};
  }

  // Flow sent over the forward edge with this id.
  std::int64_t flow_on(int edge_id) const { return edges_[2 * edge_id + 1].capacity; }

 private:
  struct Edge {
    int to = 0;
    int next = -1;
    std::int64_t capacity = 0;
    std::int64_t cost = 0;
  };

  std::vector<int> head_;
  std::vector<Edge> edges_;
};

}  // namespace daytrip
