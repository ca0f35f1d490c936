#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/events.hpp"
#include "daytrip/plans.hpp"

namespace daytrip {

struct ModeUtility {
  double constant = 0;
  double beta_distance = 0;  // utils per meter
  double beta_travel = 0;    // utils per hour
};

// Plan utility parameters. Leg utility is constant + beta_distance x meters +
// beta_travel x hours; activity utility is the Charypar-Nagel log form.
struct ScoringParams {
  std::map<Mode, ModeUtility> modes;
  double beta_performing = 6.0;  // utils per hour
  std::map<ActivityType, double> typical_hours;
  double stuck_penalty = -600.0;
  double min_activity_s = 60.0;

  static ScoringParams defaults() {
    ScoringParams p;
    p.modes[Mode::car] = {-10.0, 0.0, -6.0};
    p.modes[Mode::ride] = {-210.0, 0.0, -6.0};
    p.modes[Mode::pt] = {-225.0, 0.0, -6.0};
    p.modes[Mode::walk] = {0.0, -0.04, -6.0};
    p.modes[Mode::bike] = {-50.0, -0.04, -36.0};
    p.typical_hours[ActivityType::home] = 12.0;
    p.typical_hours[ActivityType::work] = 8.0;
    p.typical_hours[ActivityType::education] = 6.0;
    p.typical_hours[ActivityType::shopping] = 1.0;
    p.typical_hours[ActivityType::medical] = 1.0;
    p.typical_hours[ActivityType::eat_out] = 1.0;
    p.typical_hours[ActivityType::social] = 2.0;
    p.typical_hours[ActivityType::entertain] = 2.0;
    p.typical_hours[ActivityType::exercise] = 1.0;
    p.typical_hours[ActivityType::escort] = 0.5;
    p.typical_hours[ActivityType::other] = 1.0;
    return p;
  }

  // AMoD legs use the car parameters unless given their own row.
  const ModeUtility& mode(Mode m) const {
    auto it = modes.find(m);
    if (it == modes.end() && m == Mode::amod) it = modes.find(Mode::car);
    if (it == modes.end())
      throw Error("no scoring parameters for mode " + std::string(mode_name(m)));
    return it->second;
  }

  double typical(ActivityType t) const {
    auto it = typical_hours.find(t);
    if (it == typical_hours.end()) throw Error("no typical duration for activity type");
    return it->second;
  }
};

struct ExecutedLeg {
  Mode mode = Mode::walk;
  Time depart = 0;
  Time arrive = 0;
  double distance = 0;
  bool stuck = false;     // never arrived
  bool rejected = false;  // DRT request refused, trip skipped
};

struct ExecutedActivity {
  ActivityType type = ActivityType::home;
  Time start = 0;
  Time end = 0;
  std::string facility;
};

struct ExecutedDay {
  PersonId person = -1;
  std::vector<ExecutedLeg> legs;
  std::vector<ExecutedActivity> activities;
};

// Reconstructs each person's realized day from the event stream. Events must
// be sorted (sort_events). The first activity opens at time 0; the final
// activity is left open and closed by the caller's day end at scoring time.
inline std::map<PersonId, ExecutedDay> extract_days(const std::vector<Event>& events) {
  std::map<PersonId, ExecutedDay> out;
  struct State {
    bool traveling = false;
    bool opened = false;
  };
  std::map<PersonId, State> st;
  for (const auto& e : events) {
    if (e.person < 0) continue;
    ExecutedDay& day = out[e.person];
    day.person = e.person;
    State& s = st[e.person];
    switch (e.kind) {
      case EventKind::act_end: {
        if (!s.opened) {
          ExecutedActivity first;
          first.type = activity_type_from_name(e.info);
          first.start = 0;
          first.facility = e.facility;
          day.activities.push_back(first);
          s.opened = true;
        }
        day.activities.back().end = e.time;
        break;
      }
      case EventKind::depart: {
        ExecutedLeg leg;
        leg.mode = mode_from_name(e.mode);
        leg.depart = e.time;
        day.legs.push_back(leg);
        s.traveling = true;
        break;
      }
      case EventKind::arrive: {
        if (!day.legs.empty() && s.traveling) {
          day.legs.back().arrive = e.time;
          day.legs.back().distance = e.distance >= 0 ? e.distance : 0;
        }
        s.traveling = false;
        break;
      }
      case EventKind::drt_reject: {
        ExecutedLeg leg;
        leg.mode = Mode::amod;
        leg.depart = e.time;
        leg.arrive = e.time;
        leg.rejected = true;
        day.legs.push_back(leg);
        s.traveling = false;
        break;
      }
      case EventKind::stuck: {
        if (s.traveling && !day.legs.empty()) {
          day.legs.back().stuck = true;
          day.legs.back().arrive = e.time;
        } else {
          ExecutedLeg leg;
          leg.mode = e.mode.empty() ? Mode::walk : mode_from_name(e.mode);
          leg.depart = e.time;
          leg.arrive = e.time;
          leg.stuck = true;
          day.legs.push_back(leg);
        }
        s.traveling = false;
        break;
      }
      case EventKind::act_start: {
        ExecutedActivity act;
        act.type = activity_type_from_name(e.info);
        act.start = e.time;
        act.end = e.time;
        act.facility = e.facility;
        day.activities.push_back(act);
        s.opened = true;
        break;
      }
      default:
        break;
    }
  }
  return out;
}

inline double leg_utility(const ExecutedLeg& leg, const ScoringParams& p) {
  if (leg.stuck || leg.rejected) return p.stuck_penalty;
  const ModeUtility& m = p.mode(leg.mode);
  double hours = (leg.arrive - leg.depart) / 3600.0;
  return m.constant + m.beta_distance * leg.distance + m.beta_travel * hours;
}

inline double activity_utility(ActivityType type, double duration_s, const ScoringParams& p) {
  double t_typ = p.typical(type);
  double t0 = t_typ * std::exp(-1.0);
  double hours = std::max(duration_s, p.min_activity_s) / 3600.0;
  return p.beta_performing * t_typ * std::log(hours / t0);
}

// Scores a realized day. The first and last activity wrap around the day end
// when they share a type (an agent at home overnight performs one activity).
inline double score_day(const ExecutedDay& day, const ScoringParams& p,
                        Time day_end = kDayEnd) {
  double total = 0;
  for (const auto& leg : day.legs) total += leg_utility(leg, p);
  const auto& acts = day.activities;
  if (acts.empty()) return total;
  if (acts.size() == 1) {
    total += activity_utility(acts[0].type, day_end, p);
    return total;
  }
  double first_dur = std::max(0.0, acts.front().end - acts.front().start);
  double last_dur = std::max(0.0, day_end - acts.back().start);
  if (acts.front().type == acts.back().type) {
    total += activity_utility(acts.front().type, first_dur + last_dur, p);
  } else {
    total += activity_utility(acts.front().type, first_dur, p);
    total += activity_utility(acts.back().type, last_dur, p);
  }
  for (size_t i = 1; i + 1 < acts.size(); ++i)
    total += activity_utility(acts[i].type, std::max(0.0, acts[i].end - acts[i].start), p);
  return total;
}

inline double score_plan(const DailyPlan& plan, const ExecutedDay& day,
                         const ScoringParams& p, Time day_end = kDayEnd) {
  (void)plan;
  return score_day(day, p, day_end);
}

}  // namespace daytrip
