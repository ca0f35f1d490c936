#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/network_router.hpp"
#include "daytrip/plans.hpp"
#include "daytrip/rng.hpp"
#include "daytrip/scenario.hpp"

namespace daytrip {

enum class Strategy { best_score, reroute, time_mutate, mode_choice };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::best_score: return "best_score";
    case Strategy::reroute: return "reroute";
    case Strategy::time_mutate: return "time_mutate";
    case Strategy::mode_choice: return "mode_choice";
  }
  return "?";
}

struct ReplanningConfig {
  double best_score = 0.4;
  double reroute = 0.2;
  double time_mutate = 0.2;
  double mode_choice = 0.2;
  double time_mutation_range_s = 1800.0;
  int plan_memory = 5;
  double innovation_disabled_after = 0.9;  // fraction of iterations
  bool amod_enabled = false;               // adds amod to seniors' choice set

  void validate() const {
    double s = best_score + reroute + time_mutate + mode_choice;
    if (std::abs(s - 1.0) > 1e-9) throw Error("strategy shares must sum to 1");
    if (plan_memory < 1) throw Error("plan memory must be at least 1");
  }
};

struct CoevAgent {
  PersonId person = -1;
  bool has_license = false;
  bool senior = false;
  std::vector<DailyPlan> plans;
  int selected = 0;

  DailyPlan& selected_plan() { return plans[selected]; }
  const DailyPlan& selected_plan() const { return plans[selected]; }
};

// Splits n agents into the four strategy groups with exact counts (floor plus
// largest remainders) and a seeded shuffle deciding who lands where.
inline std::vector<Strategy> partition_strategies(size_t n, const ReplanningConfig& cfg,
                                                  Rng& rng) {
  const double shares[4] = {cfg.best_score, cfg.reroute, cfg.time_mutate, cfg.mode_choice};
  size_t counts[4];
  double rem[4];
  size_t assigned = 0;
  for (int i = 0; i < 4; ++i) {
    double exact = shares[i] * static_cast<double>(n);
    counts[i] = static_cast<size_t>(std::floor(exact + 1e-9));
    rem[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 4; ++i)
      if (rem[i] > rem[best] + 1e-12) best = i;
    counts[best] += 1;
    rem[best] = -1;
    assigned += 1;
  }
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<Strategy> out(n);
  size_t pos = 0;
  for (int s = 0; s < 4; ++s)
    for (size_t k = 0; k < counts[s]; ++k) out[order[pos++]] = static_cast<Strategy>(s);
  return out;
}

// Highest score wins; unscored plans lose to scored ones; ties take the
// lowest plan index.
inline int best_plan_index(const std::vector<DailyPlan>& plans) {
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < plans.size(); ++i) {
    double s = plans[i].scored ? plans[i].score : -std::numeric_limits<double>::infinity();
    if (best < 0 || s > best_score) {
      best = static_cast<int>(i);
      best_score = s;
    }
  }
  return best;
}

// Drops the lowest-scored unselected plan until the memory bound holds.
// Unscored plans are treated as lowest; ties evict the oldest.
inline void enforce_memory(CoevAgent& agent, int memory) {
  while (static_cast<int>(agent.plans.size()) > memory) {
    int victim = -1;
    double worst = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < agent.plans.size(); ++i) {
      if (static_cast<int>(i) == agent.selected) continue;
      double s = agent.plans[i].scored ? agent.plans[i].score
                                       : -std::numeric_limits<double>::infinity();
      if (victim < 0 || s < worst) {
        victim = static_cast<int>(i);
        worst = s;
      }
    }
    if (victim < 0) break;
    agent.plans.erase(agent.plans.begin() + victim);
    if (agent.selected > victim) agent.selected -= 1;
  }
}

inline void adopt_new_plan(CoevAgent& agent, DailyPlan plan, int memory) {
  plan.score = 0;
  plan.scored = false;
  agent.plans.push_back(std::move(plan));
  agent.selected = static_cast<int>(agent.plans.size()) - 1;
  enforce_memory(agent, memory);
}

// Regenerates car/ride routes of a copy of the selected plan under the given
// travel-time estimates.
inline DailyPlan reroute_plan(const CoevAgent& agent, const Scenario& scenario,
                              const CarRouter& router, const TravelTimeEstimates& estimates) {
  DailyPlan plan = agent.selected_plan();
  Time depart = 0;
  for (size_t i = 0; i < plan.legs.size(); ++i) {
    depart = plan.activities[i].end_time;
    PlanLeg& leg = plan.legs[i];
    if (leg.mode != Mode::car && leg.mode != Mode::ride) continue;
    const std::string& from = plan.activities[i].facility;
    const std::string& to = plan.activities[i + 1].facility;
    if (from.empty() || to.empty()) continue;
    int o = scenario.facility_link(from);
    int d = scenario.facility_link(to);
    auto path = router.route(o, d, depart, estimates);
    leg.route.clear();
    leg.route.reserve(path.size());
    for (int l : path) leg.route.push_back(scenario.network.links[l].id);
  }
  return plan;
}

// Shifts every non-final activity end uniformly within the mutation range,
// preserving order; out-of-order draws are resampled then clamped.
inline DailyPlan time_mutate_plan(const CoevAgent& agent, const ReplanningConfig& cfg,
                                  Rng& rng) {
  DailyPlan plan = agent.selected_plan();
  Time prev_end = 0;
  const double r = cfg.time_mutation_range_s;
  for (size_t i = 0; i + 1 < plan.activities.size(); ++i) {
    double base = plan.activities[i].end_time;
    double lo = prev_end + 60.0;
    double t = 0;
    bool ok = false;
    for (int attempt = 0; attempt < 10; ++attempt) {
      t = base + rng.uniform(-r, r);
      if (t >= lo && t < kDayEnd) {
        ok = true;
        break;
      }
    }
    if (!ok) t = std::min(std::max(t, lo), kDayEnd - 1.0);
    plan.activities[i].end_time = t;
    prev_end = t;
  }
  return plan;
}

// The legs between consecutive home activities (or the whole day when the
// plan never returns home mid-day) form the subtours.
inline std::vector<std::pair<size_t, size_t>> subtour_leg_ranges(const DailyPlan& plan) {
  std::vector<size_t> home_acts;
  for (size_t i = 0; i < plan.activities.size(); ++i)
    if (plan.activities[i].type == ActivityType::home) home_acts.push_back(i);
  std::vector<std::pair<size_t, size_t>> out;
  for (size_t k = 0; k + 1 < home_acts.size(); ++k) {
    size_t first_leg = home_acts[k];
    size_t end_leg = home_acts[k + 1];
    if (end_leg > first_leg) out.push_back({first_leg, end_leg});
  }
  if (out.empty() && !plan.legs.empty()) out.push_back({0, plan.legs.size()});
  return out;
}

inline std::vector<Mode> choice_set(const CoevAgent& agent, const ReplanningConfig& cfg) {
  std::vector<Mode> modes;
  for (Mode m : kChoiceModes) {
    if (m == Mode::car && !agent.has_license) continue;
    modes.push_back(m);
  }
  if (cfg.amod_enabled && agent.senior) modes.push_back(Mode::amod);
  return modes;
}

// Reassigns one uniformly drawn subtour to one uniformly drawn permitted mode.
inline DailyPlan mode_choice_plan(const CoevAgent& agent, const ReplanningConfig& cfg,
                                  Rng& rng) {
  DailyPlan plan = agent.selected_plan();
  auto ranges = subtour_leg_ranges(plan);
  if (ranges.empty()) return plan;
  auto [lo, hi] = ranges[rng.next_below(ranges.size())];
  std::vector<Mode> modes = choice_set(agent, cfg);
  Mode m = modes[rng.next_below(modes.size())];
  for (size_t i = lo; i < hi; ++i) {
    plan.legs[i].mode = m;
    plan.legs[i].route.clear();
  }
  return plan;
}

// One replanning pass: partition agents over strategies, apply innovations,
// reselect. Iteration indexes the pass; innovation stops once the next
// iteration crosses the configured fraction of total iterations.
inline void replan(std::vector<CoevAgent>& agents, int iteration, int total_iterations,
                   const ReplanningConfig& cfg, const Scenario& scenario,
                   const CarRouter& router, const TravelTimeEstimates& estimates,
                   std::uint64_t seed) {
  cfg.validate();
  bool innovate = true;
  if (total_iterations > 0) {
    int cutoff = static_cast<int>(std::floor(cfg.innovation_disabled_after *
                                             static_cast<double>(total_iterations)));
    innovate = (iteration + 1) < cutoff;
  }
  Rng part_rng(mix_seed(mix_seed(seed, "replan"), static_cast<std::uint64_t>(iteration)));
  std::vector<Strategy> strategy(agents.size(), Strategy::best_score);
  if (innovate) strategy = partition_strategies(agents.size(), cfg, part_rng);

  for (size_t i = 0; i < agents.size(); ++i) {
    CoevAgent& agent = agents[i];
    Rng rng(mix_seed(mix_seed(mix_seed(seed, "strategy"),
                              static_cast<std::uint64_t>(iteration)),
                     static_cast<std::uint64_t>(agent.person)));
    switch (strategy[i]) {
      case Strategy::best_score:
        agent.selected = best_plan_index(agent.plans);
        break;
      case Strategy::reroute:
        adopt_new_plan(agent, reroute_plan(agent, scenario, router, estimates),
                       cfg.plan_memory);
        break;
      case Strategy::time_mutate:
        adopt_new_plan(agent, time_mutate_plan(agent, cfg, rng), cfg.plan_memory);
        break;
      case Strategy::mode_choice:
        adopt_new_plan(agent, mode_choice_plan(agent, cfg, rng), cfg.plan_memory);
        break;
    }
  }
}

}  // namespace daytrip
