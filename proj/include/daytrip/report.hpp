#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/coevolution.hpp"
#include "daytrip/csv.hpp"
#include "daytrip/drt.hpp"
#include "daytrip/events.hpp"
#include "daytrip/numfmt.hpp"
#include "daytrip/population.hpp"

namespace daytrip {

struct PersonInfo {
  int age = 0;
  int sex = 0;
  bool senior = false;
  bool has_license = false;
};

inline std::map<PersonId, PersonInfo> population_info(const std::vector<SyntheticPerson>& persons) {
  std::map<PersonId, PersonInfo> out;
  for (const auto& p : persons) {
    PersonInfo i;
    i.age = p.age;
    i.sex = p.sex;
    i.senior = p.is_senior();
    i.has_license = p.has_license;
    out[p.id] = i;
  }
  return out;
}

struct TripRecord {
  PersonId person = -1;
  int age = 0;
  int sex = 0;
  bool senior = false;
  bool has_license = false;
  std::string purpose;  // destination activity type
  Mode mode = Mode::walk;
  Time depart = 0;
  Time arrive = 0;
  double distance = 0;
};

// One record per depart/arrive pair; the destination activity names the
// purpose. Stuck legs never arrive and so never become trips.
inline std::vector<TripRecord> extract_trips(const std::vector<Event>& events,
                                             const std::map<PersonId, PersonInfo>& people) {
  std::vector<TripRecord> trips;
  struct Open {
    bool traveling = false;
    TripRecord trip;
    int awaiting_purpose = -1;  // index into trips
  };
  std::map<PersonId, Open> st;
  for (const auto& e : events) {
    if (e.person < 0) continue;
    switch (e.kind) {
      case EventKind::depart: {
        Open& o = st[e.person];
        o.traveling = true;
        o.trip = TripRecord{};
        o.trip.person = e.person;
        if (auto m = parse_mode(e.mode)) o.trip.mode = *m;
        o.trip.depart = e.time;
        auto it = people.find(e.person);
        if (it != people.end()) {
          o.trip.age = it->second.age;
          o.trip.sex = it->second.sex;
          o.trip.senior = it->second.senior;
          o.trip.has_license = it->second.has_license;
        }
        break;
      }
      case EventKind::arrive: {
        Open& o = st[e.person];
        if (!o.traveling) break;
        o.traveling = false;
        o.trip.arrive = e.time;
        o.trip.distance = e.distance >= 0 ? e.distance : 0;
        trips.push_back(o.trip);
        o.awaiting_purpose = static_cast<int>(trips.size()) - 1;
        break;
      }
      case EventKind::act_start: {
        Open& o = st[e.person];
        if (o.awaiting_purpose >= 0) {
          trips[static_cast<size_t>(o.awaiting_purpose)].purpose = e.info;
          o.awaiting_purpose = -1;
        }
        break;
      }
      case EventKind::stuck: {
        st[e.person].traveling = false;
        break;
      }
      default:
        break;
    }
  }
  return trips;
}

// --- aggregations ---------------------------------------------------------------

template <typename Filter>
std::map<Mode, double> modal_share(const std::vector<TripRecord>& trips, Filter&& keep) {
  std::map<Mode, double> counts;
  double total = 0;
  for (const auto& t : trips) {
    if (!keep(t)) continue;
    counts[t.mode] += 1;
    total += 1;
  }
  if (total == 0) throw Error("modal_share: no trips selected");
  for (auto& [m, c] : counts) c /= total;
  return counts;
}

inline std::map<Mode, double> modal_share(const std::vector<TripRecord>& trips) {
  return modal_share(trips, [](const TripRecord&) { return true; });
}

inline std::array<std::int64_t, 24> start_time_histogram(const std::vector<TripRecord>& trips) {
  std::array<std::int64_t, 24> bins{};
  for (const auto& t : trips) {
    int b = static_cast<int>(std::floor(t.depart / 3600.0));
    bins[static_cast<size_t>(std::clamp(b, 0, 23))] += 1;
  }
  return bins;
}

inline std::map<std::string, std::int64_t> purpose_counts(const std::vector<TripRecord>& trips) {
  std::map<std::string, std::int64_t> out;
  for (const auto& t : trips) out[t.purpose.empty() ? "other" : t.purpose] += 1;
  return out;
}

inline const char* age_band(int age) {
  if (age < 11) return "under_11";
  if (age < 65) return "11_64";
  if (age < 75) return "65_74";
  return "75_plus";
}

// Named indicator rows in a stable order: trips per capita (overall 11+ and
// by band), mean trip duration by purpose, mean car trip length, and
// stay-at-home shares by age band x sex x license.
inline std::vector<std::pair<std::string, double>> mobility_indicators(
    const std::vector<TripRecord>& trips, const std::vector<SyntheticPerson>& persons) {
  std::vector<std::pair<std::string, double>> rows;

  std::map<PersonId, const SyntheticPerson*> by_id;
  for (const auto& p : persons) by_id[p.id] = &p;
  std::map<PersonId, int> trip_count;
  for (const auto& t : trips) trip_count[t.person] += 1;

  auto capita = [&](auto&& keep_person) {
    std::int64_t people = 0, n = 0;
    for (const auto& p : persons) {
      if (!keep_person(p)) continue;
      people += 1;
      auto it = trip_count.find(p.id);
      n += it == trip_count.end() ? 0 : it->second;
    }
    return people == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(people);
  };
  rows.push_back({"trips_per_capita_11_plus",
                  capita([](const SyntheticPerson& p) { return p.age >= 11; })});
  rows.push_back({"trips_per_capita_11_64", capita([](const SyntheticPerson& p) {
                    return p.age >= 11 && p.age < 65;
                  })});
  rows.push_back({"trips_per_capita_65_74", capita([](const SyntheticPerson& p) {
                    return p.age >= 65 && p.age < 75;
                  })});
  rows.push_back({"trips_per_capita_75_plus",
                  capita([](const SyntheticPerson& p) { return p.age >= 75; })});

  std::map<std::string, std::pair<double, std::int64_t>> dur;
  for (const auto& t : trips) {
    auto& d = dur[t.purpose.empty() ? "other" : t.purpose];
    d.first += t.arrive - t.depart;
    d.second += 1;
  }
  for (const auto& [purpose, d] : dur)
    rows.push_back({"mean_trip_duration_s_" + purpose, d.first / static_cast<double>(d.second)});

  double car_len = 0;
  std::int64_t car_n = 0;
  for (const auto& t : trips) {
    if (t.mode != Mode::car) continue;
    car_len += t.distance;
    car_n += 1;
  }
  rows.push_back({"mean_car_trip_length_m", car_n == 0 ? 0.0 : car_len / static_cast<double>(car_n)});

  std::map<std::string, std::pair<std::int64_t, std::int64_t>> stay;  // group -> (home, total)
  for (const auto& p : persons) {
    if (p.age < 11) continue;
    std::string group = std::string(age_band(p.age)) + "_sex" + std::to_string(p.sex) +
                        (p.has_license ? "_lic1" : "_lic0");
    auto& g = stay[group];
    g.second += 1;
    if (!trip_count.count(p.id)) g.first += 1;
  }
  for (const auto& [group, g] : stay)
    rows.push_back({"stay_at_home_share_" + group,
                    static_cast<double>(g.first) / static_cast<double>(g.second)});
  return rows;
}

// Demographics over persons with at least one completed request.
inline std::vector<std::pair<std::string, double>> amod_user_stats(
    const std::vector<DrtRequestRecord>& requests,
    const std::vector<SyntheticPerson>& persons) {
  std::vector<std::pair<std::string, double>> rows;
  std::int64_t served = 0, rejected = 0;
  std::set<PersonId> users;
  for (const auto& r : requests) {
    if (r.state == RequestState::completed) {
      served += 1;
      users.insert(r.person);
    }
    if (r.state == RequestState::rejected) rejected += 1;
  }
  rows.push_back({"requests", static_cast<double>(requests.size())});
  rows.push_back({"served", static_cast<double>(served)});
  rows.push_back({"rejected", static_cast<double>(rejected)});
  rows.push_back({"users", static_cast<double>(users.size())});

  std::map<PersonId, const SyntheticPerson*> by_id;
  for (const auto& p : persons) by_id[p.id] = &p;
  double age_sum = 0;
  std::int64_t n = 0, female = 0, unlicensed = 0, over75 = 0;
  for (PersonId id : users) {
    auto it = by_id.find(id);
    if (it == by_id.end()) continue;
    const SyntheticPerson& p = *it->second;
    n += 1;
    age_sum += p.age;
    if (p.sex == 0) female += 1;
    if (!p.has_license) unlicensed += 1;
    if (p.age >= 75) over75 += 1;
  }
  if (n > 0) {
    rows.push_back({"user_mean_age", age_sum / static_cast<double>(n)});
    rows.push_back({"user_share_female", static_cast<double>(female) / static_cast<double>(n)});
    rows.push_back({"user_share_unlicensed",
                    static_cast<double>(unlicensed) / static_cast<double>(n)});
    rows.push_back({"user_share_75_plus", static_cast<double>(over75) / static_cast<double>(n)});
  }
  return rows;
}

// --- CSV emission with across-seed aggregation -----------------------------------

// mean/min/max over per-seed values for string-keyed rows.
inline void write_keyed_stats_csv(const std::string& path, const std::string& key_column,
                                  const std::vector<std::map<std::string, double>>& per_seed) {
  std::set<std::string> keys;
  for (const auto& m : per_seed)
    for (const auto& [k, v] : m) keys.insert(k);
  CsvWriter w(path, {key_column, "mean", "min", "max"});
  for (const auto& k : keys) {
    double sum = 0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& m : per_seed) {
      auto it = m.find(k);
      double v = it == m.end() ? 0.0 : it->second;
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    double mean = per_seed.empty() ? 0.0 : sum / static_cast<double>(per_seed.size());
    w.write_row({k, num(mean), num(lo), num(hi)});
  }
}

struct SeedReport {
  std::uint64_t seed = 0;
  std::vector<TripRecord> trips;
};

inline void write_modal_share_csv(const std::string& path,
                                  const std::vector<SeedReport>& seeds) {
  std::vector<std::map<std::string, double>> per_seed;
  for (const auto& s : seeds) {
    std::map<std::string, double> m;
    for (const auto& [mode, share] : modal_share(s.trips)) m[mode_name(mode)] = share;
    per_seed.push_back(std::move(m));
  }
  write_keyed_stats_csv(path, "mode", per_seed);
}

inline void write_purposes_csv(const std::string& path, const std::vector<SeedReport>& seeds) {
  std::vector<std::map<std::string, double>> per_seed;
  for (const auto& s : seeds) {
    std::map<std::string, double> m;
    double total = 0;
    for (const auto& [purpose, count] : purpose_counts(s.trips)) {
      m[purpose] = static_cast<double>(count);
      total += static_cast<double>(count);
    }
    for (auto& [k, v] : m) v /= std::max(1.0, total);
    per_seed.push_back(std::move(m));
  }
  write_keyed_stats_csv(path, "purpose", per_seed);
}

inline void write_start_times_csv(const std::string& path,
                                  const std::vector<SeedReport>& seeds) {
  CsvWriter w(path, {"hour", "mean", "min", "max"});
  std::vector<std::array<std::int64_t, 24>> hists;
  for (const auto& s : seeds) hists.push_back(start_time_histogram(s.trips));
  for (int h = 0; h < 24; ++h) {
    double sum = 0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& hist : hists) {
      double v = static_cast<double>(hist[static_cast<size_t>(h)]);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    double mean = hists.empty() ? 0.0 : sum / static_cast<double>(hists.size());
    if (hists.empty()) lo = hi = 0;
    w.write_row({std::to_string(h), num(mean), num(lo), num(hi)});
  }
}

inline void write_indicators_csv(const std::string& path, const std::vector<SeedReport>& seeds,
                                 const std::vector<SyntheticPerson>& persons) {
  std::vector<std::map<std::string, double>> per_seed;
  for (const auto& s : seeds) {
    std::map<std::string, double> m;
    for (const auto& [k, v] : mobility_indicators(s.trips, persons)) m[k] = v;
    per_seed.push_back(std::move(m));
  }
  write_keyed_stats_csv(path, "indicator", per_seed);
}

inline void write_amod_requests_csv(const std::string& path,
                                    const std::vector<std::pair<std::uint64_t,
                                                                std::vector<DrtRequestRecord>>>& runs) {
  CsvWriter w(path, {"seed", "request", "person", "submission", "state", "vehicle",
                     "wait_s", "ride_s", "distance_m", "origin_zone", "reason"});
  for (const auto& [seed, requests] : runs) {
    for (const auto& r : requests) {
      double wait = r.pickup_time >= 0 ? r.pickup_time - r.submission : -1;
      double ride = (r.dropoff_time >= 0 && r.pickup_time >= 0)
                        ? r.dropoff_time - r.pickup_time
                        : -1;
      w.write_row({std::to_string(seed), std::to_string(r.id), std::to_string(r.person),
             num(r.submission), request_state_name(r.state),
             r.vehicle >= 0 ? std::to_string(r.vehicle) : "", num(wait), num(ride),
             num(r.distance), std::to_string(r.origin_zone), r.reason});
    }
  }
}

inline void write_amod_users_csv(const std::string& path,
                                 const std::vector<std::pair<std::uint64_t,
                                                             std::vector<DrtRequestRecord>>>& runs,
                                 const std::vector<SyntheticPerson>& persons) {
  std::vector<std::map<std::string, double>> per_seed;
  for (const auto& [seed, requests] : runs) {
    std::map<std::string, double> m;
    for (const auto& [k, v] : amod_user_stats(requests, persons)) m[k] = v;
    per_seed.push_back(std::move(m));
  }
  write_keyed_stats_csv(path, "metric", per_seed);
}

inline void write_zone_requests_csv(const std::string& path, const ZoneGrid& zones,
                                    const std::vector<std::map<int, int>>& per_seed_counts) {
  std::set<int> all;
  for (const auto& m : per_seed_counts)
    for (const auto& [z, c] : m) all.insert(z);
  CsvWriter w(path, {"zone", "x", "y", "mean", "min", "max"});
  for (int z : all) {
    double sum = 0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& m : per_seed_counts) {
      auto it = m.find(z);
      double v = it == m.end() ? 0.0 : static_cast<double>(it->second);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    double mean = per_seed_counts.empty() ? 0.0
                                          : sum / static_cast<double>(per_seed_counts.size());
    Point c = zones.centroid(z);
    w.write_row({std::to_string(z), num(c.x), num(c.y), num(mean), num(lo), num(hi)});
  }
}

inline void write_calibration_trajectory_csv(const std::string& path,
                                             const std::vector<CalibrationPoint>& trajectory) {
  CsvWriter w(path, {"step", "mode", "share", "lo", "hi", "constant"});
  for (const auto& pt : trajectory)
    w.write_row({std::to_string(pt.step), mode_name(pt.mode), num(pt.share), num(pt.lo),
           num(pt.hi), num(pt.constant)});
}

inline void write_iteration_stats_csv(const std::string& path,
                                      const std::vector<IterationStats>& stats) {
  CsvWriter w(path, {"iteration", "avg_score", "car", "ride", "pt", "walk", "bike", "amod",
                     "departures", "arrivals", "stuck", "drt_rejections"});
  for (const auto& s : stats) {
    auto share = [&](Mode m) {
      auto it = s.shares.find(m);
      return num(it == s.shares.end() ? 0.0 : it->second);
    };
    w.write_row({std::to_string(s.iteration), num(s.avg_executed_score), share(Mode::car),
           share(Mode::ride), share(Mode::pt), share(Mode::walk), share(Mode::bike),
           share(Mode::amod), std::to_string(s.departures), std::to_string(s.arrivals),
           std::to_string(s.stuck), std::to_string(s.drt_rejections)});
  }
}

}  // namespace daytrip
