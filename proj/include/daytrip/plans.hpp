#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "daytrip/common.hpp"
#include "daytrip/diaries.hpp"
#include "daytrip/parallel.hpp"
#include "daytrip/population.hpp"
#include "daytrip/rng.hpp"
#include "daytrip/scenario.hpp"

namespace daytrip {

constexpr Time kDayEnd = 24 * 3600.0;

struct PlanActivity {
  ActivityType type = ActivityType::home;
  std::string facility;
  Point location;
  Time end_time = kDayEnd;  // the last activity keeps kDayEnd (open end)
};

struct PlanLeg {
  Mode mode = Mode::walk;
  Time diary_duration = 0;          // merged travel-episode duration, seconds
  std::vector<std::string> route;   // car/ride/amod: link ids, filled by routing
};

struct DailyPlan {
  std::vector<PlanActivity> activities;
  std::vector<PlanLeg> legs;
  double score = std::numeric_limits<double>::quiet_NaN();
  bool scored = false;

  bool empty_day() const { return legs.empty(); }
};

// Eq.-style trip distance window from mode speed and diary trip duration.
struct TripDistanceRange {
  double min_m = 0;
  double max_m = 0;
};

// Mode speeds in meters per minute used only for distance-window derivation.
struct ModeSpeedTable {
  std::map<Mode, double> speed_m_per_min = {
      {Mode::car, 500.0},  {Mode::ride, 500.0}, {Mode::pt, 416.7},
      {Mode::bike, 250.0}, {Mode::walk, 80.0},
  };

  double speed(Mode m) const {
    auto it = speed_m_per_min.find(m);
    if (it == speed_m_per_min.end() || it->second <= 0)
      throw Error("no speed configured for mode " + std::string(mode_name(m)));
    return it->second;
  }
};

inline TripDistanceRange trip_distance_range(Mode mode, double duration_minutes,
                                             const ModeSpeedTable& speeds = {}) {
  const double v = speeds.speed(mode);
  TripDistanceRange r;
  r.min_m = std::max(0.0, v * (duration_minutes - 2.5));
  r.max_m = v * (duration_minutes + 2.5);
  return r;
}

inline double minkowski_distance(const Point& a, const Point& b, double p = 1.54) {
  const double dx = std::abs(a.x - b.x);
  const double dy = std::abs(a.y - b.y);
  if (dx == 0) return dy;
  if (dy == 0) return dx;
  return std::pow(std::pow(dx, p) + std::pow(dy, p), 1.0 / p);
}

// --- Activity-type inference ---------------------------------------------------

// Maps a diary episode's (location_type, activity_type) pair onto the plan
// taxonomy. Lookup order: "loc/act", then "loc/*", then "*/act", then other.
struct ActivityTypeMap {
  std::map<std::string, std::string> rules = {
      {"home/*", "home"},          {"work/*", "work"},
      {"school/*", "education"},   {"shop/*", "shopping"},
      {"clinic/*", "medical"},     {"restaurant/*", "eat_out"},
      {"*/visit", "social"},       {"*/sport", "exercise"},
      {"*/culture", "entertain"},  {"*/escort", "escort"},
      {"*/eat", "eat_out"},        {"*/shopping", "shopping"},
  };

  ActivityType infer(const std::string& location_type, const std::string& activity_type) const {
    for (const std::string& key :
         {location_type + "/" + activity_type, location_type + "/*", "*/" + activity_type}) {
      auto it = rules.find(key);
      if (it == rules.end()) continue;
      if (auto t = parse_activity_type(it->second)) return *t;
    }
    return ActivityType::other;
  }
};

// Facility types compatible with each activity type. Empty set means any.
struct ActivityFacilityMap {
  std::map<ActivityType, FacilityTypeSet> rules = default_rules();

  static std::map<ActivityType, FacilityTypeSet> default_rules() {
    std::map<ActivityType, FacilityTypeSet> m;
    auto set = [](std::initializer_list<FacilityType> types) {
      FacilityTypeSet s;
      for (auto t : types) s.insert(t);
      return s;
    };
    m[ActivityType::work] = set({FacilityType::industrial, FacilityType::office,
                                 FacilityType::financial, FacilityType::civic});
    m[ActivityType::education] = set({FacilityType::education});
    m[ActivityType::shopping] = set({FacilityType::shop});
    m[ActivityType::medical] = set({FacilityType::healthcare});
    m[ActivityType::eat_out] = set({FacilityType::sustenance});
    m[ActivityType::social] = set({FacilityType::residence, FacilityType::sustenance,
                                   FacilityType::entertainment});
    m[ActivityType::entertain] = set({FacilityType::entertainment, FacilityType::civic,
                                      FacilityType::sport});
    m[ActivityType::exercise] = set({FacilityType::sport});
    // escort and other accept any facility type (empty set).
    m[ActivityType::escort] = FacilityTypeSet{};
    m[ActivityType::other] = FacilityTypeSet{};
    return m;
  }

  FacilityTypeSet compatible(ActivityType a) const {
    auto it = rules.find(a);
    return it == rules.end() ? FacilityTypeSet{} : it->second;
  }
};

// --- Spatial facility index ----------------------------------------------------

// Uniform grid over facility locations. Because the Minkowski distance with
// p >= 1 dominates the Chebyshev distance, every facility within Minkowski
// radius r lies inside the axis-aligned square of half-width r, so scanning
// that window is exact.
class FacilityIndex {
 public:
  FacilityIndex(const std::vector<Facility>& facilities, double cell = 500.0)
      : facilities_(&facilities), cell_(cell) {
    if (facilities.empty()) throw Error("FacilityIndex: no facilities");
    min_ = facilities[0].location;
    for (const auto& f : facilities) {
      min_.x = std::min(min_.x, f.location.x);
      min_.y = std::min(min_.y, f.location.y);
    }
    for (size_t i = 0; i < facilities.size(); ++i) {
      grid_[key(facilities[i].location)].push_back(i);
    }
  }

  // Facility indices within the square window of half-width r around c,
  // in ascending index order.
  std::vector<size_t> window(const Point& c, double r) const {
    std::vector<size_t> out;
    const auto [cx0, cy0] = cell_of(Point{c.x - r, c.y - r});
    const auto [cx1, cy1] = cell_of(Point{c.x + r, c.y + r});
    for (long cx = cx0; cx <= cx1; ++cx)
      for (long cy = cy0; cy <= cy1; ++cy) {
        auto it = grid_.find({cx, cy});
        if (it == grid_.end()) continue;
        out.insert(out.end(), it->second.begin(), it->second.end());
      }
    std::sort(out.begin(), out.end());
    return out;
  }

  const std::vector<Facility>& facilities() const { return *facilities_; }

 private:
  std::pair<long, long> cell_of(const Point& p) const {
    return {static_cast<long>(std::floor((p.x - min_.x) / cell_)),
            static_cast<long>(std::floor((p.y - min_.y) / cell_))};
  }
  std::pair<long, long> key(const Point& p) const { return cell_of(p); }

  const std::vector<Facility>* facilities_;
  double cell_;
  Point min_;
  std::map<std::pair<long, long>, std::vector<size_t>> grid_;
};

struct LocationChoice {
  size_t facility_index = 0;
  bool widened = false;  // annulus was empty, fallback fired
};

// All facilities of a compatible type within the Minkowski annulus, ascending
// index order (the brute-force oracle semantics).
inline std::vector<size_t> annulus_candidates(const FacilityIndex& index, const Point& prev,
                                              const FacilityTypeSet& compatible,
                                              const TripDistanceRange& range,
                                              double p = 1.54) {
  std::vector<size_t> out;
  for (size_t i : index.window(prev, range.max_m)) {
    const Facility& f = index.facilities()[i];
    if (!compatible.empty() && !compatible.intersects(f.types)) continue;
    double d = minkowski_distance(prev, f.location, p);
    if (d >= range.min_m && d <= range.max_m) out.push_back(i);
  }
  return out;
}

// Uniform draw within the annulus; on an empty annulus, the compatible
// facility whose Minkowski distance is closest to the annulus midpoint wins
// (ties to the smaller index) and the choice is flagged widened.
inline LocationChoice choose_location(const FacilityIndex& index, const Point& prev,
                                      const FacilityTypeSet& compatible,
                                      const TripDistanceRange& range, Rng& rng,
                                      double p = 1.54) {
  std::vector<size_t> candidates = annulus_candidates(index, prev, compatible, range, p);
  LocationChoice choice;
  if (!candidates.empty()) {
    choice.facility_index = candidates[rng.next_below(candidates.size())];
    return choice;
  }
  choice.widened = true;
  const double mid = 0.5 * (range.min_m + range.max_m);
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  const auto& fs = index.facilities();
  for (size_t i = 0; i < fs.size(); ++i) {
    if (!compatible.empty() && !compatible.intersects(fs[i].types)) continue;
    double gap = std::abs(minkowski_distance(prev, fs[i].location, p) - mid);
    if (gap < best) {
      best = gap;
      choice.facility_index = i;
      found = true;
    }
  }
  if (!found)
    throw Error("choose_location: no facility of a compatible type exists");
  return choice;
}

// --- Plan construction ---------------------------------------------------------

struct PlanBuildConfig {
  ModeSpeedTable speeds;
  ActivityTypeMap type_map;
  ActivityFacilityMap facility_map;
  double minkowski_p = 1.54;
  double perturb_s = 900.0;         // +-15 min on activity end times
  Time boundary_trip_duration = 600.0;  // synthetic trips added at day edges
  double min_activity_s = 60.0;     // floor between consecutive end times
};

struct PlanBuildStats {
  int widened = 0;            // empty-annulus fallbacks
  int car_to_ride = 0;        // unlicensed car legs downgraded
  int boundary_trips = 0;     // home anchors added at day edges
};

namespace detail {

struct MergedTrip {
  Mode mode = Mode::walk;
  Time duration = 0;
};

struct MergedActivity {
  ActivityType type = ActivityType::other;
  std::string location_type;
  Time start = 0;
  Time end = 0;
};

// Collapses the diary into alternating activities and trips: consecutive
// travel episodes merge into one trip (mode of the longest segment);
// consecutive same-place activity episodes merge into one activity typed by
// the longest episode. Leading and trailing travel without an anchoring
// activity is dropped; the home anchors add their own trips.
inline void merge_episodes(const DiaryRecord& diary, const ActivityTypeMap& type_map,
                           std::vector<MergedActivity>& acts, std::vector<MergedTrip>& trips) {
  const auto& eps = diary.episodes;
  size_t i = 0;
  while (i < eps.size() && eps[i].is_travel()) ++i;
  while (i < eps.size()) {
    if (!eps[i].is_travel() && !acts.empty() && trips.size() < acts.size()) {
      // A location change without a travel episode; cleaning removes these.
      throw Error("diary " + std::to_string(diary.id) + ": location change at t=" +
                  std::to_string(eps[i].start) + " without a travel episode");
    }
    MergedActivity a;
    a.location_type = eps[i].location_type;
    a.start = eps[i].start;
    a.end = eps[i].end();
    const DiaryEpisode* longest = &eps[i];
    ++i;
    while (i < eps.size() && !eps[i].is_travel() &&
           eps[i].location_type == a.location_type) {
      if (eps[i].duration > longest->duration) longest = &eps[i];
      a.end = eps[i].end();
      ++i;
    }
    a.type = type_map.infer(longest->location_type, longest->activity_type);
    acts.push_back(std::move(a));
    if (i >= eps.size() || !eps[i].is_travel()) continue;

    MergedTrip t;
    t.duration = eps[i].duration;
    longest = &eps[i];
    ++i;
    while (i < eps.size() && eps[i].is_travel()) {
      if (eps[i].duration > longest->duration) longest = &eps[i];
      t.duration += eps[i].duration;
      ++i;
    }
    t.mode = mode_from_name(longest->mode);
    if (i >= eps.size()) break;
    trips.push_back(std::move(t));
  }
}

}  // namespace detail

// Builds the located, timed plan for one person from its matched diary.
inline DailyPlan build_plan(const SyntheticPerson& person, const DiaryRecord& diary,
                            const FacilityIndex& index, const Facility& residence,
                            const PlanBuildConfig& cfg, std::uint64_t seed,
                            PlanBuildStats* stats = nullptr) {
  PlanBuildStats local;
  PlanBuildStats& st = stats ? *stats : local;
  Rng rng(mix_seed(mix_seed(seed, "plan"), static_cast<std::uint64_t>(person.id)));

  DailyPlan plan;
  if (!diary.has_trips()) {
    PlanActivity home;
    home.type = ActivityType::home;
    home.facility = residence.id;
    home.location = residence.location;
    home.end_time = kDayEnd;
    plan.activities.push_back(std::move(home));
    return plan;
  }

  std::vector<detail::MergedActivity> acts;
  std::vector<detail::MergedTrip> trips;
  detail::merge_episodes(diary, cfg.type_map, acts, trips);
  if (acts.empty()) {
    PlanActivity home;
    home.type = ActivityType::home;
    home.facility = residence.id;
    home.location = residence.location;
    plan.activities.push_back(std::move(home));
    return plan;
  }

  auto nearest_mode = [&](size_t trip_pos) {
    return trips.empty() ? Mode::walk
                         : trips[std::min(trip_pos, trips.size() - 1)].mode;
  };

  // Home anchoring: the day starts and ends at home.
  if (acts.front().location_type != "home") {
    detail::MergedTrip t{nearest_mode(0), cfg.boundary_trip_duration};
    trips.insert(trips.begin(), t);
    detail::MergedActivity home;
    home.type = ActivityType::home;
    home.location_type = "home";
    home.start = 0;
    home.end = std::max(0.0, acts.front().start - cfg.boundary_trip_duration);
    acts.insert(acts.begin(), home);
    ++st.boundary_trips;
  }
  if (acts.back().location_type != "home") {
    detail::MergedTrip t{nearest_mode(trips.size()), cfg.boundary_trip_duration};
    trips.push_back(t);
    detail::MergedActivity home;
    home.type = ActivityType::home;
    home.location_type = "home";
    home.start = acts.back().end + cfg.boundary_trip_duration;
    home.end = kDayEnd;
    acts.push_back(home);
    ++st.boundary_trips;
  }
  acts.front().type = ActivityType::home;
  acts.back().type = ActivityType::home;

  if (acts.size() != trips.size() + 1)
    throw Error("build_plan: diary " + std::to_string(diary.id) +
                ": merged sequence does not alternate");

  // Locations.
  std::vector<std::string> fac_ids(acts.size());
  std::vector<Point> fac_pts(acts.size());
  Point prev = residence.location;
  for (size_t a = 0; a < acts.size(); ++a) {
    if (acts[a].type == ActivityType::home || acts[a].location_type == "home") {
      fac_ids[a] = residence.id;
      fac_pts[a] = residence.location;
    } else {
      TripDistanceRange range =
          trip_distance_range(trips[a - 1].mode, trips[a - 1].duration / 60.0, cfg.speeds);
      LocationChoice choice =
          choose_location(index, prev, cfg.facility_map.compatible(acts[a].type), range, rng,
                          cfg.minkowski_p);
      if (choice.widened) ++st.widened;
      fac_ids[a] = index.facilities()[choice.facility_index].id;
      fac_pts[a] = index.facilities()[choice.facility_index].location;
    }
    prev = fac_pts[a];
  }

  // End times: diary times, perturbed +-perturb_s while preserving order.
  std::vector<Time> ends(acts.size());
  Time prev_end = 0;
  for (size_t a = 0; a < acts.size(); ++a) {
    if (a + 1 == acts.size()) {
      ends[a] = kDayEnd;
      break;
    }
    Time base = acts[a].end;
    Time lo_bound = prev_end + cfg.min_activity_s;
    Time t = base;
    for (int attempt = 0; attempt < 10; ++attempt) {
      t = base + rng.uniform(-cfg.perturb_s, cfg.perturb_s);
      if (t >= lo_bound) break;
    }
    if (t < lo_bound) t = lo_bound;
    ends[a] = t;
    prev_end = t;
  }

  for (size_t a = 0; a < acts.size(); ++a) {
    PlanActivity pa;
    pa.type = acts[a].type;
    pa.facility = fac_ids[a];
    pa.location = fac_pts[a];
    pa.end_time = ends[a];
    plan.activities.push_back(std::move(pa));
  }
  for (const auto& t : trips) {
    PlanLeg leg;
    leg.mode = t.mode;
    if (leg.mode == Mode::car && !person.has_license) {
      leg.mode = Mode::ride;
      ++st.car_to_ride;
    }
    leg.diary_duration = t.duration;
    plan.legs.push_back(std::move(leg));
  }
  return plan;
}

// --- Validation ----------------------------------------------------------------

inline void validate_plan(const DailyPlan& plan, bool has_license) {
  if (plan.activities.empty()) throw Error("plan has no activities");
  if (plan.activities.size() != plan.legs.size() + 1)
    throw Error("plan does not alternate activities and legs");
  if (plan.activities.front().type != plan.activities.back().type)
    throw Error("plan must start and end with the same activity type");
  if (plan.activities.front().type != ActivityType::home)
    throw Error("plan must be home-anchored");
  Time prev = -1;
  for (size_t a = 0; a + 1 < plan.activities.size(); ++a) {
    if (plan.activities[a].end_time <= prev)
      throw Error("activity end times must be strictly increasing");
    prev = plan.activities[a].end_time;
  }
  for (const auto& leg : plan.legs)
    if (leg.mode == Mode::car && !has_license)
      throw Error("car leg in an unlicensed person's plan");
}

// --- JSON-lines persistence ----------------------------------------------------

inline nlohmann::json plan_to_json(const DailyPlan& plan) {
  nlohmann::json j;
  j["activities"] = nlohmann::json::array();
  for (const auto& a : plan.activities) {
    nlohmann::json ja;
    ja["type"] = activity_type_name(a.type);
    ja["facility"] = a.facility;
    ja["x"] = a.location.x;
    ja["y"] = a.location.y;
    ja["end"] = a.end_time;
    j["activities"].push_back(std::move(ja));
  }
  j["legs"] = nlohmann::json::array();
  for (const auto& l : plan.legs) {
    nlohmann::json jl;
    jl["mode"] = mode_name(l.mode);
    jl["diary_duration"] = l.diary_duration;
    if (!l.route.empty()) jl["route"] = l.route;
    j["legs"].push_back(std::move(jl));
  }
  if (plan.scored) j["score"] = plan.score;
  return j;
}

inline DailyPlan plan_from_json(const nlohmann::json& j) {
  DailyPlan plan;
  for (const auto& ja : j.at("activities")) {
    PlanActivity a;
    a.type = activity_type_from_name(ja.at("type").get<std::string>());
    a.facility = ja.at("facility").get<std::string>();
    a.location = {ja.at("x").get<double>(), ja.at("y").get<double>()};
    a.end_time = ja.at("end").get<double>();
    plan.activities.push_back(std::move(a));
  }
  for (const auto& jl : j.at("legs")) {
    PlanLeg l;
    l.mode = mode_from_name(jl.at("mode").get<std::string>());
    l.diary_duration = jl.value("diary_duration", 0.0);
    if (jl.contains("route")) l.route = jl.at("route").get<std::vector<std::string>>();
    plan.legs.push_back(std::move(l));
  }
  if (j.contains("score")) {
    plan.score = j.at("score").get<double>();
    plan.scored = true;
  }
  return plan;
}

struct PersonPlans {
  PersonId person = -1;
  std::vector<DailyPlan> plans;
  int selected = 0;
};

inline void write_plans(const std::string& path, const std::vector<PersonPlans>& all) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  for (const auto& pp : all) {
    nlohmann::json j;
    j["person"] = pp.person;
    j["selected"] = pp.selected;
    j["plans"] = nlohmann::json::array();
    for (const auto& p : pp.plans) j["plans"].push_back(plan_to_json(p));
    out << j.dump() << '\n';
  }
}

inline std::vector<PersonPlans> read_plans(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<PersonPlans> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw Error(path + ":" + std::to_string(line_no) + ": invalid JSON");
    PersonPlans pp;
    pp.person = j.at("person").get<PersonId>();
    pp.selected = j.value("selected", 0);
    for (const auto& jp : j.at("plans")) pp.plans.push_back(plan_from_json(jp));
    if (pp.plans.empty())
      throw Error(path + ":" + std::to_string(line_no) + ": person without plans");
    if (pp.selected < 0 || pp.selected >= static_cast<int>(pp.plans.size()))
      throw Error(path + ":" + std::to_string(line_no) + ": selected plan out of range");
    out.push_back(std::move(pp));
  }
  return out;
}

}  // namespace daytrip
