#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/events.hpp"
#include "daytrip/parallel.hpp"
#include "daytrip/plans.hpp"
#include "daytrip/queue_sim.hpp"
#include "daytrip/replanning.hpp"
#include "daytrip/scoring.hpp"

namespace daytrip {

struct IterationStats {
  int iteration = 0;
  double avg_executed_score = 0;
  std::map<Mode, double> shares;  // of departed trips
  int departures = 0;
  int arrivals = 0;
  int stuck = 0;
  int drt_rejections = 0;
};

// Per-iteration services the AMoD layer plugs into the loop.
struct CoevolutionHooks {
  virtual ~CoevolutionHooks() = default;
  virtual DrtDispatch* dispatcher(int iteration) { return nullptr; }
  virtual void after_iteration(int iteration, const std::vector<Event>& events) {}
};

struct CoevolutionResult {
  std::vector<IterationStats> stats;
  std::vector<Event> final_events;
};

inline std::map<Mode, double> modal_shares_from_events(const std::vector<Event>& events) {
  std::map<Mode, double> counts;
  double total = 0;
  for (const auto& e : events) {
    if (e.kind != EventKind::depart) continue;
    counts[mode_from_name(e.mode)] += 1;
    total += 1;
  }
  if (total > 0)
    for (auto& [m, c] : counts) c /= total;
  return counts;
}

// Fills car/ride routes that plans do not carry yet, so that plans persist
// their routes across iterations and only the reroute strategy changes them.
inline void materialize_routes(std::vector<CoevAgent>& agents, const Scenario& scenario,
                               const CarRouter& router, const TravelTimeEstimates& estimates,
                               int threads) {
  parallel_for(agents.size(), threads, [&](size_t i) {
    CoevAgent& agent = agents[i];
    DailyPlan& plan = agent.selected_plan();
    for (size_t k = 0; k < plan.legs.size(); ++k) {
      PlanLeg& leg = plan.legs[k];
      if ((leg.mode != Mode::car && leg.mode != Mode::ride) || !leg.route.empty()) continue;
      const std::string& from = plan.activities[k].facility;
      const std::string& to = plan.activities[k + 1].facility;
      if (from.empty() || to.empty()) continue;
      auto path = router.route(scenario.facility_link(from), scenario.facility_link(to),
                               plan.activities[k].end_time, estimates);
      leg.route.reserve(path.size());
      for (int l : path) leg.route.push_back(scenario.network.links[l].id);
    }
  });
}

inline std::vector<SimAgentSpec> make_specs(const std::vector<CoevAgent>& agents) {
  std::vector<SimAgentSpec> specs;
  specs.reserve(agents.size());
  for (const auto& a : agents) {
    SimAgentSpec s;
    s.person = a.person;
    s.plan = &a.selected_plan();
    s.has_license = a.has_license;
    s.senior = a.senior;
    specs.push_back(s);
  }
  return specs;
}

// Scores every agent's selected plan against the executed day. Agents who
// stayed home (no events) score a full-day home activity.
inline double score_population(std::vector<CoevAgent>& agents,
                               const std::map<PersonId, ExecutedDay>& days,
                               const ScoringParams& scoring, int threads) {
  std::vector<double> scores(agents.size(), 0.0);
  parallel_for(agents.size(), threads, [&](size_t i) {
    CoevAgent& agent = agents[i];
    DailyPlan& plan = agent.selected_plan();
    auto it = days.find(agent.person);
    if (it != days.end()) {
      plan.score = score_day(it->second, scoring);
    } else {
      ExecutedDay home_day;
      home_day.person = agent.person;
      ExecutedActivity act;
      act.type = plan.activities.front().type;
      act.start = 0;
      act.end = kDayEnd;
      home_day.activities.push_back(act);
      plan.score = score_day(home_day, scoring);
    }
    plan.scored = true;
    scores[i] = plan.score;
  });
  double sum = 0;
  for (double s : scores) sum += s;
  return agents.empty() ? 0.0 : sum / static_cast<double>(agents.size());
}

// The co-evolution loop: simulate the selected plans, score them, mutate and
// reselect, feeding each iteration's travel times into the next.
inline CoevolutionResult run_coevolution(std::vector<CoevAgent>& agents,
                                         const Scenario& scenario, int iterations,
                                         const SimulationConfig& sim_cfg,
                                         const ScoringParams& scoring,
                                         const ReplanningConfig& replanning,
                                         std::uint64_t seed, int threads = 1,
                                         CoevolutionHooks* hooks = nullptr) {
  CoevolutionResult result;
  CarRouter router(scenario.network, Mode::car);
  TravelTimeEstimates estimates;

  for (int iter = 0; iter < iterations; ++iter) {
    materialize_routes(agents, scenario, router, estimates, threads);

    QueueSim sim(scenario, sim_cfg, estimates);
    DrtDispatch* drt = hooks ? hooks->dispatcher(iter) : nullptr;
    if (drt) sim.set_drt(drt);
    SimulationSummary summary;
    std::vector<Event> events = sim.run(make_specs(agents), &summary);

    auto days = extract_days(events);
    double avg = score_population(agents, days, scoring, threads);

    IterationStats stats;
    stats.iteration = iter;
    stats.avg_executed_score = avg;
    stats.shares = modal_shares_from_events(events);
    stats.departures = summary.departures;
    stats.arrivals = summary.arrivals;
    stats.stuck = summary.stuck;
    stats.drt_rejections = summary.drt_rejections;
    result.stats.push_back(stats);

    estimates = estimates_from_events(events, scenario.network);
    if (hooks) hooks->after_iteration(iter, events);

    if (iter + 1 < iterations) {
      replan(agents, iter, iterations, replanning, scenario, router, estimates, seed);
    } else {
      result.final_events = std::move(events);
    }
  }
  return result;
}

// --- modal-split calibration -------------------------------------------------

struct ModalSplitObjective {
  std::map<Mode, std::pair<double, double>> intervals;

  // Observed weekday mode split with the survey tolerances.
  static ModalSplitObjective defaults() {
    ModalSplitObjective o;
    o.intervals[Mode::car] = {0.676, 0.696};
    o.intervals[Mode::ride] = {0.129, 0.153};
    o.intervals[Mode::pt] = {0.083, 0.107};
    o.intervals[Mode::walk] = {0.061, 0.081};
    o.intervals[Mode::bike] = {0.0, 0.018};
    return o;
  }

  void validate() const {
    for (const auto& [m, iv] : intervals)
      if (!(0 <= iv.first && iv.first <= iv.second && iv.second <= 1))
        throw Error("invalid objective interval for mode " + std::string(mode_name(m)));
  }

  bool satisfied(const std::map<Mode, double>& shares) const {
    for (const auto& [m, iv] : intervals) {
      auto it = shares.find(m);
      double s = it == shares.end() ? 0.0 : it->second;
      if (s < iv.first - 1e-12 || s > iv.second + 1e-12) return false;
    }
    return true;
  }

  double violation(const std::map<Mode, double>& shares) const {
    double v = 0;
    for (const auto& [m, iv] : intervals) {
      auto it = shares.find(m);
      double s = it == shares.end() ? 0.0 : it->second;
      v += std::max(0.0, iv.first - s) + std::max(0.0, s - iv.second);
    }
    return v;
  }
};

struct CalibrationPoint {
  int step = 0;
  Mode mode = Mode::car;
  double share = 0;
  double lo = 0;
  double hi = 0;
  double constant = 0;  // value used for this step's run
};

struct CalibrationResult {
  ScoringParams params;
  std::vector<CalibrationPoint> trajectory;
  bool converged = false;
  int steps = 0;
};

// Nudges each out-of-range mode constant toward its target by a per-mode step
// that halves whenever the adjustment direction flips. The runner maps params
// to final modal shares (a full co-evolution run in production, a stub in
// tests).
template <typename RunFn>
CalibrationResult calibrate_modal_split(const ModalSplitObjective& objective,
                                        ScoringParams params, int max_steps, RunFn&& run,
                                        double initial_step = 5.0) {
  objective.validate();
  CalibrationResult result;
  std::map<Mode, double> step_size;
  std::map<Mode, int> last_dir;
  double best_violation = std::numeric_limits<double>::infinity();
  ScoringParams best_params = params;

  for (int step = 0; step < max_steps; ++step) {
    std::map<Mode, double> shares = run(static_cast<const ScoringParams&>(params));
    for (const auto& [m, iv] : objective.intervals) {
      CalibrationPoint pt;
      pt.step = step;
      pt.mode = m;
      auto it = shares.find(m);
      pt.share = it == shares.end() ? 0.0 : it->second;
      pt.lo = iv.first;
      pt.hi = iv.second;
      pt.constant = params.mode(m).constant;
      result.trajectory.push_back(pt);
    }
    result.steps = step + 1;
    double viol = objective.violation(shares);
    if (viol < best_violation) {
      best_violation = viol;
      best_params = params;
    }
    if (objective.satisfied(shares)) {
      result.converged = true;
      result.params = params;
      return result;
    }
    for (const auto& [m, iv] : objective.intervals) {
      auto it = shares.find(m);
      double s = it == shares.end() ? 0.0 : it->second;
      if (s >= iv.first - 1e-12 && s <= iv.second + 1e-12) continue;
      double mid = 0.5 * (iv.first + iv.second);
      int dir = s < mid ? 1 : -1;
      if (!step_size.count(m)) step_size[m] = initial_step;
      auto ld = last_dir.find(m);
      if (ld != last_dir.end() && ld->second != dir) step_size[m] *= 0.5;
      last_dir[m] = dir;
      params.modes[m].constant += step_size[m] * dir;
    }
  }
  result.params = best_params;
  return result;
}

}  // namespace daytrip
