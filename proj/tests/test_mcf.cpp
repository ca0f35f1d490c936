#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "daytrip/mincostflow.hpp"
#include "daytrip/rng.hpp"

using namespace daytrip;

TEST_CASE("min-cost flow solves a hand-checked network", "[mcf]") {
  MinCostFlow mcf(4);
  int sa = mcf.add_edge(0, 1, 2, 1);
  int sb = mcf.add_edge(0, 2, 1, 2);
  int at = mcf.add_edge(1, 3, 1, 1);
  int ab = mcf.add_edge(1, 2, 1, 1);
  int bt = mcf.add_edge(2, 3, 2, 1);

  auto [flow, cost] = mcf.solve(0, 3);
  REQUIRE(flow == 3);
  REQUIRE(cost == 8);
  REQUIRE(mcf.flow_on(sa) == 2);
  REQUIRE(mcf.flow_on(sb) == 1);
  REQUIRE(mcf.flow_on(at) == 1);
  REQUIRE(mcf.flow_on(ab) == 1);
  REQUIRE(mcf.flow_on(bt) == 2);
}

TEST_CASE("the flow limit sends only the cheapest units", "[mcf]") {
  MinCostFlow mcf(4);
  mcf.add_edge(0, 1, 2, 1);
  mcf.add_edge(0, 2, 1, 2);
  int at = mcf.add_edge(1, 3, 1, 1);
  mcf.add_edge(1, 2, 1, 1);
  mcf.add_edge(2, 3, 2, 1);

  auto [flow, cost] = mcf.solve(0, 3, 1);
  REQUIRE(flow == 1);
  REQUIRE(cost == 2);
  REQUIRE(mcf.flow_on(at) == 1);
}

TEST_CASE("disconnected sink yields zero flow", "[mcf]") {
  MinCostFlow mcf(3);
  mcf.add_edge(0, 1, 5, 1);
  auto [flow, cost] = mcf.solve(0, 2);
  REQUIRE(flow == 0);
  REQUIRE(cost == 0);
}

TEST_CASE("negative capacity or cost is rejected", "[mcf]") {
  MinCostFlow mcf(2);
  REQUIRE_THROWS_AS(mcf.add_edge(0, 1, -1, 0), Error);
  REQUIRE_THROWS_AS(mcf.add_edge(0, 1, 1, -3), Error);
}

TEST_CASE("transport instances match exhaustive enumeration", "[mcf]") {
  Rng rng(mix_seed(5, "mcf-oracle"));

  for (int trial = 0; trial < 25; ++trial) {
    int ns = 1 + static_cast<int>(rng.next_below(3));  // surplus zones
    int nd = 1 + static_cast<int>(rng.next_below(3));  // deficit zones
    std::vector<std::int64_t> supply(ns), demand(nd);
    for (auto& s : supply) s = 1 + static_cast<std::int64_t>(rng.next_below(3));
    for (auto& d : demand) d = 1 + static_cast<std::int64_t>(rng.next_below(3));
    std::vector<std::vector<std::int64_t>> unit_cost(ns, std::vector<std::int64_t>(nd));
    for (auto& row : unit_cost)
      for (auto& c : row) c = static_cast<std::int64_t>(rng.next_below(20));

    // Exhaustive search over integer flows on the transport edges.
    std::int64_t best_flow = -1, best_cost = 0;
    int edges = ns * nd;
    std::vector<std::int64_t> x(edges, 0);
    while (true) {
      bool feasible = true;
      for (int a = 0; a < ns && feasible; ++a) {
        std::int64_t out = 0;
        for (int b = 0; b < nd; ++b) out += x[a * nd + b];
        if (out > supply[a]) feasible = false;
      }
      for (int b = 0; b < nd && feasible; ++b) {
        std::int64_t in = 0;
        for (int a = 0; a < ns; ++a) in += x[a * nd + b];
        if (in > demand[b]) feasible = false;
      }
      if (feasible) {
        std::int64_t total = 0, cost = 0;
        for (int a = 0; a < ns; ++a)
          for (int b = 0; b < nd; ++b) {
            total += x[a * nd + b];
            cost += x[a * nd + b] * unit_cost[a][b];
          }
        if (total > best_flow || (total == best_flow && cost < best_cost)) {
          best_flow = total;
          best_cost = cost;
        }
      }
      int k = 0;
      while (k < edges && x[k] == 3) x[k++] = 0;
      if (k == edges) break;
      x[k] += 1;
    }

    MinCostFlow mcf(ns + nd + 2);
    int s = ns + nd, t = ns + nd + 1;
    for (int a = 0; a < ns; ++a) mcf.add_edge(s, a, supply[a], 0);
    for (int b = 0; b < nd; ++b) mcf.add_edge(ns + b, t, demand[b], 0);
    std::vector<int> mid_ids;
    for (int a = 0; a < ns; ++a)
      for (int b = 0; b < nd; ++b) mid_ids.push_back(mcf.add_edge(a, ns + b, 3, unit_cost[a][b]));

    auto [flow, cost] = mcf.solve(s, t);
    REQUIRE(flow == best_flow);
    REQUIRE(cost == best_cost);

    // Conservation at every interior node.
    for (int a = 0; a < ns; ++a) {
      std::int64_t out = 0;
      for (int b = 0; b < nd; ++b) out += mcf.flow_on(mid_ids[a * nd + b]);
      REQUIRE(out <= supply[a]);
    }
    std::int64_t mid_total = 0;
    for (int id : mid_ids) mid_total += mcf.flow_on(id);
    REQUIRE(mid_total == flow);
  }
}
