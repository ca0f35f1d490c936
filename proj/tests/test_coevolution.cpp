#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "daytrip/coevolution.hpp"
#include "daytrip/fixtures.hpp"

using namespace daytrip;

namespace {

std::vector<CoevAgent> toy_commuters(const fixtures::TwoRouteToy& toy, int n) {
  const Facility& home = toy.scenario.facility("o");
  const Facility& office = toy.scenario.facility("d");
  std::vector<CoevAgent> agents;
  for (int i = 0; i < n; ++i) {
    CoevAgent a;
    a.person = i;
    a.has_license = true;
    DailyPlan plan;
    PlanActivity at_home;
    at_home.type = ActivityType::home;
    at_home.facility = home.id;
    at_home.location = home.location;
    at_home.end_time = 8 * 3600.0;
    PlanActivity at_work;
    at_work.type = ActivityType::work;
    at_work.facility = office.id;
    at_work.location = office.location;
    at_work.end_time = kDayEnd;
    PlanLeg drive;
    drive.mode = Mode::car;
    plan.activities = {at_home, at_work};
    plan.legs = {drive};
    a.plans.push_back(std::move(plan));
    agents.push_back(std::move(a));
  }
  return agents;
}

int link_users(const std::vector<Event>& events, const Scenario& scenario, int link) {
  const std::string& id = scenario.network.links[link].id;
  int n = 0;
  for (const auto& e : events)
    if (e.kind == EventKind::link_enter && e.link == id) ++n;
  return n;
}

}  // namespace

TEST_CASE("modal shares count depart events") {
  std::vector<Event> events;
  Event e;
  e.kind = EventKind::depart;
  e.mode = "car";
  events.push_back(e);
  events.push_back(e);
  e.mode = "walk";
  events.push_back(e);
  e.kind = EventKind::arrive;
  e.mode = "bike";
  events.push_back(e);  // non-depart events are ignored

  auto shares = modal_shares_from_events(events);
  REQUIRE(shares.at(Mode::car) == Catch::Approx(2.0 / 3.0));
  REQUIRE(shares.at(Mode::walk) == Catch::Approx(1.0 / 3.0));
  REQUIRE(shares.count(Mode::bike) == 0);
  REQUIRE(modal_shares_from_events({}).empty());
}

TEST_CASE("two-route toy settles near the analytic split") {
  auto toy = fixtures::make_two_route_toy();
  const int n = 100;
  auto agents = toy_commuters(toy, n);

  SimulationConfig sim_cfg;
  sim_cfg.flow_capacity_factor = 1.0;  // the analytic split assumes nominal rates
  auto scoring = ScoringParams::defaults();
  ReplanningConfig replanning;
  replanning.best_score = 0.8;
  replanning.reroute = 0.2;
  replanning.time_mutate = 0.0;
  replanning.mode_choice = 0.0;

  const int iterations = 60;
  auto result = run_coevolution(agents, toy.scenario, iterations, sim_cfg, scoring,
                                replanning, 1234);

  REQUIRE(result.stats.size() == iterations);
  for (const auto& s : result.stats) {
    REQUIRE(s.departures == n);
    REQUIRE(s.arrivals + s.stuck == s.departures);
    REQUIRE(s.stuck == 0);
  }
  for (const auto& a : agents) {
    REQUIRE(a.plans.size() <= 5);
    REQUIRE(a.selected < static_cast<int>(a.plans.size()));
  }

  // With every commuter departing at once, the fast route absorbs queueing
  // delay until its marginal vehicle matches the slow route's free flow:
  // rate * (slow - fast) + 1 = 0.2 * 200 + 1 = 41 vehicles.
  int fast = link_users(result.final_events, toy.scenario, toy.fast_link);
  int slow = link_users(result.final_events, toy.scenario, toy.slow_link);
  REQUIRE(fast + slow == n);
  double fast_share = static_cast<double>(fast) / n;
  REQUIRE(fast_share > 0.31);
  REQUIRE(fast_share < 0.51);

  REQUIRE(result.stats.back().avg_executed_score >=
          result.stats.front().avg_executed_score);
}

TEST_CASE("coevolution is deterministic across thread counts") {
  auto toy = fixtures::make_two_route_toy();
  auto a1 = toy_commuters(toy, 40);
  auto a4 = toy_commuters(toy, 40);

  SimulationConfig sim_cfg;
  sim_cfg.flow_capacity_factor = 1.0;
  auto scoring = ScoringParams::defaults();
  ReplanningConfig replanning;
  replanning.best_score = 0.6;
  replanning.reroute = 0.2;
  replanning.time_mutate = 0.1;
  replanning.mode_choice = 0.1;

  auto r1 = run_coevolution(a1, toy.scenario, 12, sim_cfg, scoring, replanning, 99, 1);
  auto r4 = run_coevolution(a4, toy.scenario, 12, sim_cfg, scoring, replanning, 99, 4);

  auto same_event = [](const Event& a, const Event& b) {
    return a.time == b.time && a.kind == b.kind && a.person == b.person &&
           a.mode == b.mode && a.link == b.link && a.vehicle == b.vehicle &&
           a.facility == b.facility && a.distance == b.distance && a.info == b.info;
  };
  REQUIRE(r1.final_events.size() == r4.final_events.size());
  for (size_t i = 0; i < r1.final_events.size(); ++i) {
    REQUIRE(same_event(r1.final_events[i], r4.final_events[i]));
  }
  for (size_t i = 0; i < a1.size(); ++i) {
    REQUIRE(a1[i].selected == a4[i].selected);
    REQUIRE(a1[i].plans.size() == a4[i].plans.size());
  }
}

TEST_CASE("calibration homes in on a logit toy") {
  ModalSplitObjective objective;
  objective.intervals[Mode::car] = {0.59, 0.61};

  auto run = [](const ScoringParams& p) {
    double c = p.mode(Mode::car).constant - p.mode(Mode::walk).constant;
    double share_car = 1.0 / (1.0 + std::exp(-c / 10.0));
    return std::map<Mode, double>{{Mode::car, share_car}, {Mode::walk, 1.0 - share_car}};
  };

  auto params = ScoringParams::defaults();  // car constant starts at -10
  auto result = calibrate_modal_split(objective, params, 50, run);

  REQUIRE(result.converged);
  REQUIRE(result.steps <= 50);
  double share = run(result.params).at(Mode::car);
  REQUIRE(share >= 0.59);
  REQUIRE(share <= 0.61);

  REQUIRE(result.trajectory.size() == static_cast<size_t>(result.steps));
  REQUIRE(result.trajectory.front().constant == Catch::Approx(-10.0));
  for (const auto& pt : result.trajectory) {
    REQUIRE(pt.mode == Mode::car);
    REQUIRE(pt.lo == Catch::Approx(0.59));
    REQUIRE(pt.hi == Catch::Approx(0.61));
  }
}

TEST_CASE("calibration returns the least-violating parameters when stuck") {
  ModalSplitObjective objective;
  objective.intervals[Mode::car] = {0.99, 1.0};  // unreachable for the stub below

  auto run = [](const ScoringParams& p) {
    double c = p.mode(Mode::car).constant;
    double share = 0.5 + 0.3 * std::tanh(c / 50.0);  // capped at 0.8
    return std::map<Mode, double>{{Mode::car, share}};
  };

  auto params = ScoringParams::defaults();
  auto result = calibrate_modal_split(objective, params, 12, run);
  REQUIRE_FALSE(result.converged);
  REQUIRE(result.steps == 12);
  // The returned params are the best seen, so they cannot do worse than the start.
  double start = objective.violation(run(ScoringParams::defaults()));
  double got = objective.violation(run(result.params));
  REQUIRE(got <= start + 1e-12);
}

TEST_CASE("objective validation rejects bad intervals") {
  ModalSplitObjective flipped;
  flipped.intervals[Mode::car] = {0.7, 0.6};
  REQUIRE_THROWS_AS(flipped.validate(), Error);

  ModalSplitObjective oversize;
  oversize.intervals[Mode::walk] = {0.5, 1.2};
  REQUIRE_THROWS_AS(oversize.validate(), Error);
}
