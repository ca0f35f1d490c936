#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "daytrip/coevolution.hpp"
#include "daytrip/drt.hpp"
#include "daytrip/matching.hpp"
#include "daytrip/plans.hpp"
#include "daytrip/population.hpp"

namespace daytrip {

// Plugs a DRT fleet into the co-evolution loop. Link travel-time estimates
// for dispatch are an exponential moving average over iterations; the
// rebalancer sees the previous iteration's per-zone request counts.
class AmodService : public CoevolutionHooks {
 public:
  AmodService(const Scenario& scenario, const DrtConfig& drt, const RebalancingConfig& reb)
      : scen_(&scenario), drt_(drt), reb_(reb),
        ema_(scenario.network.links.size(), -1.0) {
    rebuild_estimates();
  }

  DrtDispatch* dispatcher(int iteration) override {
    (void)iteration;
    fleet_ = std::make_unique<DrtFleet>(*scen_, drt_, reb_, estimates_, &demand_);
    return fleet_.get();
  }

  void after_iteration(int iteration, const std::vector<Event>& events) override {
    (void)iteration;
    update_ema(events);
    rebuild_estimates();
    if (fleet_) {
      demand_ = fleet_->demand_table();
      last_requests_ = fleet_->requests();
      last_stats_ = fleet_->stats();
      last_zone_counts_ = fleet_->zone_request_counts();
      last_log_ = fleet_->task_log();
    }
  }

  const std::vector<DrtRequestRecord>& last_requests() const { return last_requests_; }
  const FleetStats& last_stats() const { return last_stats_; }
  const std::map<int, int>& last_zone_counts() const { return last_zone_counts_; }
  const std::vector<FleetLogRow>& last_log() const { return last_log_; }
  const ZoneGrid zones() const { return ZoneGrid(scen_->network, reb_.cell_size_m); }

 private:
  void update_ema(const std::vector<Event>& events) {
    std::map<std::pair<std::string, std::int64_t>, std::pair<int, Time>> open;
    std::vector<double> sum(ema_.size(), 0.0);
    std::vector<int> count(ema_.size(), 0);
    for (const auto& e : events) {
      if (e.kind != EventKind::link_enter && e.kind != EventKind::link_leave) continue;
      auto it = scen_->network.link_index.find(e.link);
      if (it == scen_->network.link_index.end()) continue;
      auto key = std::make_pair(e.vehicle, e.person);
      if (e.kind == EventKind::link_enter) {
        open[key] = {it->second, e.time};
      } else {
        auto o = open.find(key);
        if (o != open.end() && o->second.first == it->second) {
          sum[static_cast<size_t>(it->second)] += e.time - o->second.second;
          count[static_cast<size_t>(it->second)] += 1;
          open.erase(o);
        }
      }
    }
    const double a = drt_.travel_time_estimation_alpha;
    for (size_t l = 0; l < ema_.size(); ++l) {
      if (count[l] == 0) continue;
      double mean = sum[l] / count[l];
      ema_[l] = ema_[l] < 0 ? mean : (1.0 - a) * ema_[l] + a * mean;
    }
  }

  void rebuild_estimates() {
    const Time horizon = 30 * 3600.0;
    TravelTimeEstimates est(ema_.size(), horizon, horizon);  // one bin
    for (size_t l = 0; l < ema_.size(); ++l) {
      double value = ema_[l] >= 0 ? ema_[l] : link_freeflow(scen_->network.links[l]);
      est.record(l, 0, value);
    }
    estimates_ = std::move(est);
  }

  const Scenario* scen_;
  DrtConfig drt_;
  RebalancingConfig reb_;
  std::vector<double> ema_;  // seconds per link, -1 until observed
  TravelTimeEstimates estimates_;
  std::map<std::pair<int, int>, int> demand_;
  std::unique_ptr<DrtFleet> fleet_;
  std::vector<DrtRequestRecord> last_requests_;
  FleetStats last_stats_;
  std::map<int, int> last_zone_counts_;
  std::vector<FleetLogRow> last_log_;
};

// --- induced demand -------------------------------------------------------------

struct InducedTransformStats {
  int rematched = 0;
  int amod_legs = 0;
};

// Re-matches every unlicensed senior as if they held a license, rebuilds their
// plan, and rewrites the resulting car legs to the AMoD mode. Everyone else
// keeps their plan.
inline InducedTransformStats induced_demand_transform(
    const std::vector<SyntheticPerson>& persons, const std::vector<Household>& households,
    const Scenario& scenario, const std::vector<DiaryRecord>& diaries, const Codebook& book,
    const PlanBuildConfig& cfg, std::uint64_t seed, std::map<PersonId, DailyPlan>& plans,
    int threads = 1) {
  if (diaries.empty()) throw Error("induced_demand_transform: no diaries");
  DiaryMatcher matcher(diaries, book);
  FacilityIndex index(scenario.facilities);
  std::map<DiaryId, const DiaryRecord*> diary_by_id;
  for (const auto& d : diaries) diary_by_id[d.id] = &d;
  std::map<HouseholdId, const Household*> hh_by_id;
  for (const auto& h : households) hh_by_id[h.id] = &h;

  std::vector<size_t> targets;
  for (size_t i = 0; i < persons.size(); ++i)
    if (persons[i].is_senior() && !persons[i].has_license) targets.push_back(i);

  std::vector<DailyPlan> rebuilt(targets.size());
  std::vector<int> leg_counts(targets.size(), 0);
  parallel_for(targets.size(), threads, [&](size_t k) {
    SyntheticPerson copy = persons[targets[k]];
    copy.has_license = true;
    auto match = matcher.nearest(copy);
    const DiaryRecord* diary = diary_by_id.at(match.diary);
    auto hh = hh_by_id.find(copy.household);
    if (hh == hh_by_id.end())
      throw Error("person " + std::to_string(copy.id) + " has no household");
    const Facility& residence = scenario.facility(hh->second->residence_facility);
    DailyPlan plan = build_plan(copy, *diary, index, residence, cfg, seed);
    for (auto& leg : plan.legs) {
      if (leg.mode == Mode::car) {
        leg.mode = Mode::amod;
        leg.route.clear();
        leg_counts[k] += 1;
      }
    }
    rebuilt[k] = std::move(plan);
  });

  InducedTransformStats stats;
  for (size_t k = 0; k < targets.size(); ++k) {
    plans[persons[targets[k]].id] = std::move(rebuilt[k]);
    stats.rematched += 1;
    stats.amod_legs += leg_counts[k];
  }
  return stats;
}

// --- scenario runner --------------------------------------------------------------

struct AmodRunConfig {
  DrtConfig drt;
  RebalancingConfig rebalancing;
  int iterations = 150;
};

struct AmodRunResult {
  CoevolutionResult coevolution;
  std::vector<DrtRequestRecord> requests;  // final iteration
  FleetStats fleet;
  std::map<int, int> zone_requests;
  std::vector<FleetLogRow> fleet_log;
};

// Co-evolution rerun with the AMoD mode open to seniors and the fleet online.
inline AmodRunResult run_amod_scenario(std::vector<CoevAgent>& agents,
                                       const Scenario& scenario, const AmodRunConfig& amod,
                                       const SimulationConfig& sim_cfg,
                                       const ScoringParams& scoring,
                                       ReplanningConfig replanning, std::uint64_t seed,
                                       int threads = 1) {
  replanning.amod_enabled = true;
  AmodService service(scenario, amod.drt, amod.rebalancing);
  AmodRunResult result;
  result.coevolution = run_coevolution(agents, scenario, amod.iterations, sim_cfg, scoring,
                                       replanning, seed, threads, &service);
  result.requests = service.last_requests();
  result.fleet = service.last_stats();
  result.zone_requests = service.last_zone_counts();
  result.fleet_log = service.last_log();
  return result;
}

struct FleetSweepPoint {
  int fleet_size = 0;
  std::uint64_t seed = 0;
  FleetStats fleet;
  std::map<Mode, double> shares;
  double avg_score = 0;
};

// Runs the AMoD scenario once per (fleet size, seed) pair from the same
// starting population.
inline std::vector<FleetSweepPoint> fleet_size_sweep(
    const std::vector<CoevAgent>& base, const Scenario& scenario, AmodRunConfig amod,
    const SimulationConfig& sim_cfg, const ScoringParams& scoring,
    const ReplanningConfig& replanning, const std::vector<int>& fleet_sizes,
    const std::vector<std::uint64_t>& seeds, int threads = 1) {
  std::vector<FleetSweepPoint> out;
  for (int size : fleet_sizes) {
    for (std::uint64_t seed : seeds) {
      std::vector<CoevAgent> agents = base;
      amod.drt.fleet_size = size;
      AmodRunResult run = run_amod_scenario(agents, scenario, amod, sim_cfg, scoring,
                                            replanning, seed, threads);
      FleetSweepPoint pt;
      pt.fleet_size = size;
      pt.seed = seed;
      pt.fleet = run.fleet;
      if (!run.coevolution.stats.empty()) {
        pt.shares = run.coevolution.stats.back().shares;
        pt.avg_score = run.coevolution.stats.back().avg_executed_score;
      }
      out.push_back(std::move(pt));
    }
  }
  return out;
}

}  // namespace daytrip
