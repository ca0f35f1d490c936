#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "daytrip/coevolution.hpp"
#include "daytrip/common.hpp"
#include "daytrip/drt.hpp"
#include "daytrip/plans.hpp"
#include "daytrip/queue_sim.hpp"
#include "daytrip/replanning.hpp"
#include "daytrip/scenario.hpp"
#include "daytrip/scoring.hpp"
#include "daytrip/synthesis.hpp"

namespace daytrip {

using ojson = nlohmann::ordered_json;

struct StagePaths {
  std::string marginals;
  std::string microsample;
  std::string projections;
  std::string attributes;
  std::string diaries;
  std::string codebook;
  std::string nodes;
  std::string links;
  std::string transit_routes;
  std::string transit_stops;
  std::string buildings;
  std::string chargers;
  std::string output_dir = "out";
};

struct CalibrationConfig {
  int max_steps = 50;
  double initial_step = 5.0;
  int iterations = 30;  // co-evolution iterations per calibration run
  ModalSplitObjective objective = ModalSplitObjective::defaults();
};

struct AmodConfig {
  int iterations = 150;
  bool induced = false;
};

struct ProjectConfig {
  std::uint64_t seed = 1;
  int threads = 1;
  StagePaths paths;
  FacilityParams facilities;
  SynthesisConfig synthesis;
  PlanBuildConfig activity;
  SimulationConfig simulation;
  ScoringParams scoring = ScoringParams::defaults();
  ReplanningConfig replanning;
  int coevolution_iterations = 150;
  CalibrationConfig calibration;
  DrtConfig drt;
  RebalancingConfig rebalancing;
  AmodConfig amod;
};

namespace detail {

inline void check_keys(const ojson& j, const std::string& block,
                       std::initializer_list<const char*> allowed) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw Error("config: unknown key '" + it.key() + "' in " + block);
}

template <typename T>
void maybe(const ojson& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

constexpr Mode kConfigModes[] = {Mode::car, Mode::ride, Mode::pt,
                                 Mode::walk, Mode::bike, Mode::amod};

inline Mode require_mode(const std::string& key) {
  auto m = parse_mode(key);
  if (!m) throw Error("config: unknown mode '" + key + "'");
  return *m;
}

inline ActivityType require_activity(const std::string& key) {
  auto t = parse_activity_type(key);
  if (!t) throw Error("config: unknown activity type '" + key + "'");
  return *t;
}

}  // namespace detail

// --- serialize -------------------------------------------------------------------

inline ojson config_to_json(const ProjectConfig& c) {
  ojson j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;

  ojson paths;
  paths["marginals"] = c.paths.marginals;
  paths["microsample"] = c.paths.microsample;
  paths["projections"] = c.paths.projections;
  paths["attributes"] = c.paths.attributes;
  paths["diaries"] = c.paths.diaries;
  paths["codebook"] = c.paths.codebook;
  paths["nodes"] = c.paths.nodes;
  paths["links"] = c.paths.links;
  paths["transit_routes"] = c.paths.transit_routes;
  paths["transit_stops"] = c.paths.transit_stops;
  paths["buildings"] = c.paths.buildings;
  paths["chargers"] = c.paths.chargers;
  paths["output_dir"] = c.paths.output_dir;
  j["paths"] = paths;

  ojson fac;
  fac["min_area"] = c.facilities.min_area;
  fac["max_area"] = c.facilities.max_area;
  fac["avg_living_area"] = c.facilities.avg_living_area;
  j["facilities"] = fac;

  ojson syn;
  syn["ipf_tolerance"] = c.synthesis.ipf_tolerance;
  syn["ipf_max_iterations"] = c.synthesis.ipf_max_iterations;
  syn["apply_projection"] = c.synthesis.apply_projection;
  j["synthesis"] = syn;

  ojson act;
  ojson speeds;
  for (Mode m : kChoiceModes) speeds[mode_name(m)] = c.activity.speeds.speed(m);
  act["speed_m_per_min"] = speeds;
  act["minkowski_p"] = c.activity.minkowski_p;
  act["perturb_s"] = c.activity.perturb_s;
  act["boundary_trip_duration_s"] = c.activity.boundary_trip_duration;
  act["min_activity_s"] = c.activity.min_activity_s;
  j["activity"] = act;

  ojson sim;
  sim["flow_capacity_factor"] = c.simulation.flow_capacity_factor;
  sim["storage_capacity_factor"] = c.simulation.storage_capacity_factor;
  sim["end_time_s"] = c.simulation.end_time;
  sim["teleport_beeline_factor"] = c.simulation.teleport_beeline_factor;
  sim["walk_speed_m_per_s"] = c.simulation.teleport_speed(Mode::walk);
  sim["bike_speed_m_per_s"] = c.simulation.teleport_speed(Mode::bike);
  sim["car_length_m"] = c.simulation.car_length_m;
  sim["infinite_flow_capacity"] = c.simulation.infinite_flow_capacity;
  ojson tr;
  tr["max_access_distance_m"] = c.simulation.transit.max_access_distance_m;
  tr["transfer_distance_m"] = c.simulation.transit.transfer_distance_m;
  tr["walk_speed"] = c.simulation.transit.walk_speed;
  tr["beeline_factor"] = c.simulation.transit.beeline_factor;
  tr["max_rounds"] = c.simulation.transit.max_rounds;
  sim["transit"] = tr;
  j["simulation"] = sim;

  ojson sc;
  ojson modes;
  for (Mode m : detail::kConfigModes) {
    auto it = c.scoring.modes.find(m);
    if (it == c.scoring.modes.end()) continue;
    ojson u;
    u["constant"] = it->second.constant;
    u["utils_per_m"] = it->second.beta_distance;
    u["utils_per_h"] = it->second.beta_travel;
    modes[mode_name(m)] = u;
  }
  sc["modes"] = modes;
  sc["beta_performing_per_h"] = c.scoring.beta_performing;
  ojson hours;
  for (int i = 0; i <= static_cast<int>(ActivityType::other); ++i) {
    ActivityType t = static_cast<ActivityType>(i);
    auto it = c.scoring.typical_hours.find(t);
    if (it != c.scoring.typical_hours.end()) hours[activity_type_name(t)] = it->second;
  }
  sc["typical_hours"] = hours;
  sc["stuck_penalty"] = c.scoring.stuck_penalty;
  sc["min_activity_s"] = c.scoring.min_activity_s;
  j["scoring"] = sc;

  ojson rep;
  rep["best_score"] = c.replanning.best_score;
  rep["reroute"] = c.replanning.reroute;
  rep["time_mutate"] = c.replanning.time_mutate;
  rep["mode_choice"] = c.replanning.mode_choice;
  rep["time_mutation_range_s"] = c.replanning.time_mutation_range_s;
  rep["plan_memory"] = c.replanning.plan_memory;
  rep["innovation_disabled_after"] = c.replanning.innovation_disabled_after;
  j["replanning"] = rep;

  ojson coev;
  coev["iterations"] = c.coevolution_iterations;
  j["coevolution"] = coev;

  ojson cal;
  cal["max_steps"] = c.calibration.max_steps;
  cal["initial_step"] = c.calibration.initial_step;
  cal["iterations"] = c.calibration.iterations;
  ojson obj;
  for (Mode m : detail::kConfigModes) {
    auto it = c.calibration.objective.intervals.find(m);
    if (it == c.calibration.objective.intervals.end()) continue;
    obj[mode_name(m)] = ojson::array({it->second.first, it->second.second});
  }
  cal["objective"] = obj;
  j["calibration"] = cal;

  ojson drt;
  drt["fleet_size"] = c.drt.fleet_size;
  drt["vehicle_capacity"] = c.drt.vehicle_capacity;
  drt["max_wait_s"] = c.drt.max_wait_s;
  drt["stop_duration_s"] = c.drt.stop_duration_s;
  drt["max_travel_time_alpha"] = c.drt.max_travel_time_alpha;
  drt["max_travel_time_beta"] = c.drt.max_travel_time_beta;
  drt["travel_time_estimation_alpha"] = c.drt.travel_time_estimation_alpha;
  drt["travel_time_estimation_beta"] = c.drt.travel_time_estimation_beta;
  drt["depot_link"] = c.drt.depot_link;
  drt["av_pce"] = c.drt.av_pce;
  drt["initial_soc"] = c.drt.initial_soc;
  drt["consumption_pct_per_km"] = c.drt.consumption_pct_per_km;
  drt["charge_rate_pct_per_min"] = c.drt.charge_rate_pct_per_min;
  drt["charge_below_soc"] = c.drt.charge_below_soc;
  drt["charge_to_soc"] = c.drt.charge_to_soc;
  j["drt"] = drt;

  ojson reb;
  reb["enabled"] = c.rebalancing.enabled;
  reb["cell_size_m"] = c.rebalancing.cell_size_m;
  reb["interval_s"] = c.rebalancing.interval_s;
  reb["target_alpha"] = c.rebalancing.target_alpha;
  reb["target_beta"] = c.rebalancing.target_beta;
  j["rebalancing"] = reb;

  ojson am;
  am["iterations"] = c.amod.iterations;
  am["induced"] = c.amod.induced;
  j["amod"] = am;
  return j;
}

// --- parse -----------------------------------------------------------------------

inline ProjectConfig config_from_json(const ojson& j) {
  using detail::check_keys;
  using detail::maybe;
  ProjectConfig c;
  check_keys(j, "root",
             {"seed", "threads", "paths", "facilities", "synthesis", "activity", "simulation",
              "scoring", "replanning", "coevolution", "calibration", "drt", "rebalancing",
              "amod"});
  maybe(j, "seed", c.seed);
  maybe(j, "threads", c.threads);

  if (j.contains("paths")) {
    const ojson& p = j.at("paths");
    check_keys(p, "paths",
               {"marginals", "microsample", "projections", "attributes", "diaries", "codebook",
                "nodes", "links", "transit_routes", "transit_stops", "buildings", "chargers",
                "output_dir"});
    maybe(p, "marginals", c.paths.marginals);
    maybe(p, "microsample", c.paths.microsample);
    maybe(p, "projections", c.paths.projections);
    maybe(p, "attributes", c.paths.attributes);
    maybe(p, "diaries", c.paths.diaries);
    maybe(p, "codebook", c.paths.codebook);
    maybe(p, "nodes", c.paths.nodes);
    maybe(p, "links", c.paths.links);
    maybe(p, "transit_routes", c.paths.transit_routes);
    maybe(p, "transit_stops", c.paths.transit_stops);
    maybe(p, "buildings", c.paths.buildings);
    maybe(p, "chargers", c.paths.chargers);
    maybe(p, "output_dir", c.paths.output_dir);
  }
  if (j.contains("facilities")) {
    const ojson& f = j.at("facilities");
    check_keys(f, "facilities", {"min_area", "max_area", "avg_living_area"});
    maybe(f, "min_area", c.facilities.min_area);
    maybe(f, "max_area", c.facilities.max_area);
    maybe(f, "avg_living_area", c.facilities.avg_living_area);
  }
  if (j.contains("synthesis")) {
    const ojson& s = j.at("synthesis");
    check_keys(s, "synthesis", {"ipf_tolerance", "ipf_max_iterations", "apply_projection"});
    maybe(s, "ipf_tolerance", c.synthesis.ipf_tolerance);
    maybe(s, "ipf_max_iterations", c.synthesis.ipf_max_iterations);
    maybe(s, "apply_projection", c.synthesis.apply_projection);
  }
  if (j.contains("activity")) {
    const ojson& a = j.at("activity");
    check_keys(a, "activity", {"speed_m_per_min", "minkowski_p", "perturb_s",
                               "boundary_trip_duration_s", "min_activity_s"});
    if (a.contains("speed_m_per_min"))
      for (auto it = a.at("speed_m_per_min").begin(); it != a.at("speed_m_per_min").end(); ++it)
        c.activity.speeds.speed_m_per_min[detail::require_mode(it.key())] = it.value().get<double>();
    maybe(a, "minkowski_p", c.activity.minkowski_p);
    maybe(a, "perturb_s", c.activity.perturb_s);
    maybe(a, "boundary_trip_duration_s", c.activity.boundary_trip_duration);
    maybe(a, "min_activity_s", c.activity.min_activity_s);
  }
  if (j.contains("simulation")) {
    const ojson& s = j.at("simulation");
    check_keys(s, "simulation",
               {"flow_capacity_factor", "storage_capacity_factor", "end_time_s",
                "teleport_beeline_factor", "walk_speed_m_per_s", "bike_speed_m_per_s",
                "car_length_m", "infinite_flow_capacity", "transit"});
    maybe(s, "flow_capacity_factor", c.simulation.flow_capacity_factor);
    maybe(s, "storage_capacity_factor", c.simulation.storage_capacity_factor);
    maybe(s, "end_time_s", c.simulation.end_time);
    maybe(s, "teleport_beeline_factor", c.simulation.teleport_beeline_factor);
    maybe(s, "walk_speed_m_per_s", c.simulation.teleport_speeds[Mode::walk]);
    maybe(s, "bike_speed_m_per_s", c.simulation.teleport_speeds[Mode::bike]);
    maybe(s, "car_length_m", c.simulation.car_length_m);
    maybe(s, "infinite_flow_capacity", c.simulation.infinite_flow_capacity);
    if (s.contains("transit")) {
      const ojson& t = s.at("transit");
      check_keys(t, "simulation.transit",
                 {"max_access_distance_m", "transfer_distance_m", "walk_speed",
                  "beeline_factor", "max_rounds"});
      maybe(t, "max_access_distance_m", c.simulation.transit.max_access_distance_m);
      maybe(t, "transfer_distance_m", c.simulation.transit.transfer_distance_m);
      maybe(t, "walk_speed", c.simulation.transit.walk_speed);
      maybe(t, "beeline_factor", c.simulation.transit.beeline_factor);
      maybe(t, "max_rounds", c.simulation.transit.max_rounds);
    }
  }
  if (j.contains("scoring")) {
    const ojson& s = j.at("scoring");
    check_keys(s, "scoring", {"modes", "beta_performing_per_h", "typical_hours",
                              "stuck_penalty", "min_activity_s"});
    if (s.contains("modes")) {
      for (auto it = s.at("modes").begin(); it != s.at("modes").end(); ++it) {
        const ojson& u = it.value();
        check_keys(u, "scoring.modes." + it.key(),
                   {"constant", "utils_per_m", "utils_per_h"});
        ModeUtility& m = c.scoring.modes[detail::require_mode(it.key())];
        maybe(u, "constant", m.constant);
        maybe(u, "utils_per_m", m.beta_distance);
        maybe(u, "utils_per_h", m.beta_travel);
      }
    }
    maybe(s, "beta_performing_per_h", c.scoring.beta_performing);
    if (s.contains("typical_hours"))
      for (auto it = s.at("typical_hours").begin(); it != s.at("typical_hours").end(); ++it)
        c.scoring.typical_hours[detail::require_activity(it.key())] = it.value().get<double>();
    maybe(s, "stuck_penalty", c.scoring.stuck_penalty);
    maybe(s, "min_activity_s", c.scoring.min_activity_s);
  }
  if (j.contains("replanning")) {
    const ojson& r = j.at("replanning");
    check_keys(r, "replanning",
               {"best_score", "reroute", "time_mutate", "mode_choice", "time_mutation_range_s",
                "plan_memory", "innovation_disabled_after"});
    maybe(r, "best_score", c.replanning.best_score);
    maybe(r, "reroute", c.replanning.reroute);
    maybe(r, "time_mutate", c.replanning.time_mutate);
    maybe(r, "mode_choice", c.replanning.mode_choice);
    maybe(r, "time_mutation_range_s", c.replanning.time_mutation_range_s);
    maybe(r, "plan_memory", c.replanning.plan_memory);
    maybe(r, "innovation_disabled_after", c.replanning.innovation_disabled_after);
    c.replanning.validate();
  }
  if (j.contains("coevolution")) {
    const ojson& co = j.at("coevolution");
    check_keys(co, "coevolution", {"iterations"});
    maybe(co, "iterations", c.coevolution_iterations);
  }
  if (j.contains("calibration")) {
    const ojson& cal = j.at("calibration");
    check_keys(cal, "calibration", {"max_steps", "initial_step", "iterations", "objective"});
    maybe(cal, "max_steps", c.calibration.max_steps);
    maybe(cal, "initial_step", c.calibration.initial_step);
    maybe(cal, "iterations", c.calibration.iterations);
    if (cal.contains("objective")) {
      c.calibration.objective.intervals.clear();
      for (auto it = cal.at("objective").begin(); it != cal.at("objective").end(); ++it) {
        const ojson& iv = it.value();
        if (!iv.is_array() || iv.size() != 2)
          throw Error("config: calibration.objective." + it.key() + " must be [lo, hi]");
        c.calibration.objective.intervals[detail::require_mode(it.key())] = {iv[0].get<double>(),
                                                                   iv[1].get<double>()};
      }
      c.calibration.objective.validate();
    }
  }
  if (j.contains("drt")) {
    const ojson& d = j.at("drt");
    check_keys(d, "drt",
               {"fleet_size", "vehicle_capacity", "max_wait_s", "stop_duration_s",
                "max_travel_time_alpha", "max_travel_time_beta", "travel_time_estimation_alpha",
                "travel_time_estimation_beta", "depot_link", "av_pce", "initial_soc",
                "consumption_pct_per_km", "charge_rate_pct_per_min", "charge_below_soc",
                "charge_to_soc"});
    maybe(d, "fleet_size", c.drt.fleet_size);
    maybe(d, "vehicle_capacity", c.drt.vehicle_capacity);
    maybe(d, "max_wait_s", c.drt.max_wait_s);
    maybe(d, "stop_duration_s", c.drt.stop_duration_s);
    maybe(d, "max_travel_time_alpha", c.drt.max_travel_time_alpha);
    maybe(d, "max_travel_time_beta", c.drt.max_travel_time_beta);
    maybe(d, "travel_time_estimation_alpha", c.drt.travel_time_estimation_alpha);
    maybe(d, "travel_time_estimation_beta", c.drt.travel_time_estimation_beta);
    maybe(d, "depot_link", c.drt.depot_link);
    maybe(d, "av_pce", c.drt.av_pce);
    maybe(d, "initial_soc", c.drt.initial_soc);
    maybe(d, "consumption_pct_per_km", c.drt.consumption_pct_per_km);
    maybe(d, "charge_rate_pct_per_min", c.drt.charge_rate_pct_per_min);
    maybe(d, "charge_below_soc", c.drt.charge_below_soc);
    maybe(d, "charge_to_soc", c.drt.charge_to_soc);
  }
  if (j.contains("rebalancing")) {
    const ojson& r = j.at("rebalancing");
    check_keys(r, "rebalancing",
               {"enabled", "cell_size_m", "interval_s", "target_alpha", "target_beta"});
    maybe(r, "enabled", c.rebalancing.enabled);
    maybe(r, "cell_size_m", c.rebalancing.cell_size_m);
    maybe(r, "interval_s", c.rebalancing.interval_s);
    maybe(r, "target_alpha", c.rebalancing.target_alpha);
    maybe(r, "target_beta", c.rebalancing.target_beta);
    c.rebalancing.validate();
  }
  if (j.contains("amod")) {
    const ojson& a = j.at("amod");
    check_keys(a, "amod", {"iterations", "induced"});
    maybe(a, "iterations", c.amod.iterations);
    maybe(a, "induced", c.amod.induced);
  }
  return c;
}

inline std::string dump_config(const ProjectConfig& c) {
  return config_to_json(c).dump(2) + "\n";
}

inline ProjectConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  ojson j;
  try {
    j = ojson::parse(in);
  } catch (const std::exception& e) {
    throw Error("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

inline void save_config(const ProjectConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write config " + path);
  out << dump_config(c);
}

}  // namespace daytrip
