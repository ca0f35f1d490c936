#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/csv.hpp"

namespace daytrip {

// One 24h diary episode, 5-minute grid. Travel episodes carry a mode and use
// location_type "travel"; activity episodes carry a place label instead.
struct DiaryEpisode {
  Time start = 0;
  Time duration = 0;
  std::string location_type;  // home, work, school, shop, clinic, restaurant, ..., travel, missing
  std::string activity_type;  // survey activity code (free string, mapped via config)
  std::string mode;           // travel episodes only: car, ride, pt, walk, bike, plane, boat

  bool is_travel() const { return location_type == "travel"; }
  Time end() const { return start + duration; }
};

struct DiaryRecord {
  DiaryId id = -1;
  int age_class = 0;
  int sex = 0;
  int labour_force_status = 0;
  int income_class = 0;
  int qualification_class = 0;
  int household_size_class = 0;
  bool children_present = false;
  int health = 1;
  bool has_license = false;
  int day_type = 0;  // 0 weekday, 1 saturday, 2 sunday
  bool urban = true;
  std::vector<DiaryEpisode> episodes;

  bool has_trips() const {
    return std::any_of(episodes.begin(), episodes.end(),
                       [](const DiaryEpisode& e) { return e.is_travel(); });
  }
};

inline std::vector<DiaryRecord> load_diaries(const std::string& path) {
  std::map<DiaryId, DiaryRecord> records;
  std::map<DiaryId, std::vector<std::pair<int, DiaryEpisode>>> episodes;
  CsvReader reader(path);
  reader.for_each([&](const CsvRow& row) {
    DiaryId id = row.get_int("diary_id");
    auto [it, inserted] = records.try_emplace(id);
    if (inserted) {
      DiaryRecord& r = it->second;
      r.id = id;
      r.age_class = static_cast<int>(row.get_int("age_class"));
      r.sex = static_cast<int>(row.get_int("sex"));
      r.labour_force_status = static_cast<int>(row.get_int("labour_force_status"));
      r.income_class = static_cast<int>(row.get_int("income_class"));
      r.qualification_class = static_cast<int>(row.get_int("qualification_class"));
      r.household_size_class = static_cast<int>(row.get_int("household_size_class"));
      r.children_present = row.get_bool("children_present");
      r.health = static_cast<int>(row.get_int("health"));
      r.has_license = row.get_bool("has_license");
      r.day_type = static_cast<int>(row.get_int("day_type"));
      r.urban = row.get_bool("urban");
    }
    DiaryEpisode e;
    e.start = row.get_double("start");
    e.duration = row.get_double("duration");
    e.location_type = row.get("location_type");
    e.activity_type = row.get("activity_type");
    e.mode = row.has("mode") ? row.get("mode") : "";
    episodes[id].emplace_back(static_cast<int>(row.get_int("episode_index")), std::move(e));
  });
  std::vector<DiaryRecord> out;
  out.reserve(records.size());
  for (auto& [id, rec] : records) {
    auto& eps = episodes[id];
    std::sort(eps.begin(), eps.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [_, e] : eps) rec.episodes.push_back(std::move(e));
    out.push_back(std::move(rec));
  }
  return out;
}

// Episodes must tile the day contiguously on a 5-minute grid.
inline void validate_diary(const DiaryRecord& r) {
  Time cursor = -1;
  for (const auto& e : r.episodes) {
    if (std::fmod(e.duration, 300.0) != 0.0 || e.duration <= 0)
      throw Error("diary " + std::to_string(r.id) + ": episode duration " +
                  std::to_string(e.duration) + " is not a positive multiple of 300 s");
    if (cursor >= 0 && e.start != cursor)
      throw Error("diary " + std::to_string(r.id) + ": episodes not contiguous at t=" +
                  std::to_string(e.start));
    cursor = e.end();
  }
}

struct CleaningStats {
  int rural = 0;
  int bad_episode = 0;   // missing location, plane/boat trip, or car trip > 1 h
  int missing_trip = 0;  // location changed without a travel episode
  int weekend = 0;
  int kept = 0;

  int removed() const { return rural + bad_episode + missing_trip + weekend; }
};

// Applies the survey cleaning rules in a fixed order; each record is counted
// under the first rule that removes it.
inline std::vector<DiaryRecord> clean_diaries(const std::vector<DiaryRecord>& records,
                                              CleaningStats* stats = nullptr) {
  CleaningStats local;
  CleaningStats& s = stats ? *stats : local;
  std::vector<DiaryRecord> out;
  for (const auto& r : records) {
    if (!r.urban) {
      ++s.rural;
      continue;
    }
    bool bad = false;
    for (const auto& e : r.episodes) {
      if (!e.is_travel() && e.location_type == "missing") bad = true;
      if (e.is_travel() && (e.mode == "plane" || e.mode == "boat")) bad = true;
      if (e.is_travel() && e.mode == "car" && e.duration > 3600) bad = true;
    }
    if (bad) {
      ++s.bad_episode;
      continue;
    }
    bool missing_trip = false;
    const std::string* last_place = nullptr;
    bool travelled = true;
    for (const auto& e : r.episodes) {
      if (e.is_travel()) {
        travelled = true;
        continue;
      }
      if (last_place && !travelled && e.location_type != *last_place) missing_trip = true;
      last_place = &e.location_type;
      travelled = false;
    }
    if (missing_trip) {
      ++s.missing_trip;
      continue;
    }
    if (r.day_type != 0) {
      ++s.weekend;
      continue;
    }
    ++s.kept;
    out.push_back(r);
  }
  return out;
}

}  // namespace daytrip
