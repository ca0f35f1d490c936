#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "daytrip/replanning.hpp"

using namespace daytrip;

namespace {

DailyPlan stub_plan(double score, bool scored = true) {
  DailyPlan p;
  PlanActivity home;
  home.type = ActivityType::home;
  home.facility = "h";
  home.end_time = 28800;
  PlanActivity shop;
  shop.type = ActivityType::shopping;
  shop.facility = "s";
  shop.end_time = 36000;
  PlanActivity back = home;
  back.end_time = kDayEnd;
  p.activities = {home, shop, back};
  PlanLeg leg;
  leg.mode = Mode::walk;
  p.legs = {leg, leg};
  p.score = score;
  p.scored = scored;
  return p;
}

}  // namespace

TEST_CASE("strategy partition hits the configured counts exactly", "[replanning]") {
  ReplanningConfig cfg;  // 0.4 / 0.2 / 0.2 / 0.2
  Rng rng(3);
  auto strategies = partition_strategies(100, cfg, rng);
  std::map<Strategy, int> counts;
  for (Strategy s : strategies) counts[s] += 1;
  CHECK(counts[Strategy::best_score] == 40);
  CHECK(counts[Strategy::reroute] == 20);
  CHECK(counts[Strategy::time_mutate] == 20);
  CHECK(counts[Strategy::mode_choice] == 20);

  // Remainders distribute without losing anyone.
  auto odd = partition_strategies(7, cfg, rng);
  CHECK(odd.size() == 7);

  ReplanningConfig bad;
  bad.best_score = 0.9;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("best plan selection prefers scored plans and low indices", "[replanning]") {
  std::vector<DailyPlan> plans = {stub_plan(-30), stub_plan(-10), stub_plan(-10),
                                  stub_plan(0, false)};
  CHECK(best_plan_index(plans) == 1);
  std::vector<DailyPlan> unscored = {stub_plan(0, false), stub_plan(0, false)};
  CHECK(best_plan_index(unscored) == 0);
}

TEST_CASE("plan memory keeps the selected plan and evicts the worst", "[replanning]") {
  CoevAgent agent;
  agent.person = 1;
  for (double s : {-50.0, -10.0, -90.0, -20.0, -30.0}) agent.plans.push_back(stub_plan(s));
  agent.selected = 2;  // deliberately the worst one

  enforce_memory(agent, 3);
  REQUIRE(agent.plans.size() == 3);
  // The selected plan survives even as the lowest-scoring plan.
  CHECK(agent.plans[agent.selected].score == -90.0);
  // The two best others survive.
  std::vector<double> scores;
  for (const auto& p : agent.plans) scores.push_back(p.score);
  CHECK(std::count(scores.begin(), scores.end(), -10.0) == 1);
  CHECK(std::count(scores.begin(), scores.end(), -20.0) == 1);

  // Adopting new plans never exceeds the memory bound.
  for (int k = 0; k < 10; ++k) {
    adopt_new_plan(agent, stub_plan(-5.0 * k), 5);
    CHECK(agent.plans.size() <= 5);
    CHECK(agent.selected == static_cast<int>(agent.plans.size()) - 1);
  }
}

TEST_CASE("time mutation preserves activity ordering", "[replanning]") {
  CoevAgent agent;
  agent.person = 2;
  agent.plans.push_back(stub_plan(-1));
  agent.selected = 0;
  ReplanningConfig cfg;
  Rng rng(11);
  for (int k = 0; k < 200; ++k) {
    DailyPlan mutated = time_mutate_plan(agent, cfg, rng);
    REQUIRE(mutated.activities.size() == 3);
    Time prev = 0;
    for (size_t i = 0; i + 1 < mutated.activities.size(); ++i) {
      CHECK(mutated.activities[i].end_time > prev);
      CHECK(mutated.activities[i].end_time < kDayEnd);
      CHECK(std::abs(mutated.activities[i].end_time -
                     agent.selected_plan().activities[i].end_time) <=
            cfg.time_mutation_range_s + 60.0);
      prev = mutated.activities[i].end_time;
    }
    CHECK(mutated.activities.back().end_time == kDayEnd);
  }
}

TEST_CASE("the mode choice set respects licensing and the senior gate", "[replanning]") {
  ReplanningConfig cfg;
  CoevAgent licensed;
  licensed.has_license = true;
  auto modes = choice_set(licensed, cfg);
  CHECK(std::find(modes.begin(), modes.end(), Mode::car) != modes.end());
  CHECK(std::find(modes.begin(), modes.end(), Mode::amod) == modes.end());

  CoevAgent unlicensed;
  unlicensed.has_license = false;
  modes = choice_set(unlicensed, cfg);
  CHECK(std::find(modes.begin(), modes.end(), Mode::car) == modes.end());
  CHECK(modes.size() == 4);

  cfg.amod_enabled = true;
  CoevAgent senior;
  senior.has_license = false;
  senior.senior = true;
  modes = choice_set(senior, cfg);
  CHECK(std::find(modes.begin(), modes.end(), Mode::amod) != modes.end());

  CoevAgent adult;
  adult.has_license = true;
  adult.senior = false;
  modes = choice_set(adult, cfg);
  CHECK(std::find(modes.begin(), modes.end(), Mode::amod) == modes.end());
}

TEST_CASE("mode choice rewrites whole subtours", "[replanning]") {
  CoevAgent agent;
  agent.person = 3;
  agent.has_license = true;
  DailyPlan two_tours;
  PlanActivity home;
  home.type = ActivityType::home;
  home.facility = "h";
  home.end_time = 28800;
  PlanActivity work;
  work.type = ActivityType::work;
  work.facility = "w";
  work.end_time = 57600;
  PlanActivity home2 = home;
  home2.end_time = 64800;
  PlanActivity shop;
  shop.type = ActivityType::shopping;
  shop.facility = "s";
  shop.end_time = 68400;
  PlanActivity home3 = home;
  home3.end_time = kDayEnd;
  two_tours.activities = {home, work, home2, shop, home3};
  PlanLeg leg;
  leg.mode = Mode::pt;
  leg.route = {"x"};
  two_tours.legs = {leg, leg, leg, leg};
  agent.plans.push_back(two_tours);
  agent.selected = 0;

  auto ranges = subtour_leg_ranges(two_tours);
  REQUIRE(ranges.size() == 2);
  CHECK(ranges[0] == std::pair<size_t, size_t>{0, 2});
  CHECK(ranges[1] == std::pair<size_t, size_t>{2, 4});

  ReplanningConfig cfg;
  Rng rng(17);
  for (int k = 0; k < 50; ++k) {
    DailyPlan out = mode_choice_plan(agent, cfg, rng);
    // Within each subtour the mode stays homogeneous.
    CHECK(out.legs[0].mode == out.legs[1].mode);
    CHECK(out.legs[2].mode == out.legs[3].mode);
    // Changed legs lose their stale routes.
    for (size_t i = 0; i < out.legs.size(); ++i)
      if (out.legs[i].mode != Mode::pt) CHECK(out.legs[i].route.empty());
  }
}
