#pragma once

// CSV persistence for the intermediate products handed between CLI stages:
// synthetic persons, households, and the person -> diary assignment.

#include <map>
#include <string>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/config.hpp"
#include "daytrip/csv.hpp"
#include "daytrip/numfmt.hpp"
#include "daytrip/population.hpp"
#include "daytrip/scenario.hpp"

namespace daytrip {

// Assembles the simulation environment from the configured input files.
inline Scenario load_scenario(const ProjectConfig& cfg) {
  Scenario s;
  s.network = load_network(cfg.paths.nodes, cfg.paths.links);
  if (!cfg.paths.transit_routes.empty())
    s.transit = load_transit(cfg.paths.transit_routes, cfg.paths.transit_stops, s.network);
  auto buildings = load_buildings(cfg.paths.buildings);
  s.facilities = build_facilities(buildings, cfg.facilities, s.network);
  if (!cfg.paths.chargers.empty())
    s.chargers = load_chargers(cfg.paths.chargers, s.network);
  s.index_facilities();
  return s;
}

inline void save_persons(const std::vector<SyntheticPerson>& persons, const std::string& path) {
  CsvWriter w(path, {"person_id", "zone_id", "age_class", "sex", "labour_force_status",
                     "income_class", "qualification_class", "household_size_class",
                     "children_present", "household_type", "maintainer", "health",
                     "has_license", "age", "household"});
  for (const auto& p : persons)
    w.write_row({std::to_string(p.id), p.zone_id, std::to_string(p.age_class),
                 std::to_string(p.sex), std::to_string(p.labour_force_status),
                 std::to_string(p.income_class), std::to_string(p.qualification_class),
                 std::to_string(p.household_size_class), p.children_present ? "1" : "0",
                 std::to_string(p.household_type), p.maintainer_flag ? "1" : "0",
                 std::to_string(p.health), p.has_license ? "1" : "0", std::to_string(p.age),
                 std::to_string(p.household)});
}

inline std::vector<SyntheticPerson> load_persons(const std::string& path) {
  std::vector<SyntheticPerson> out;
  CsvReader reader(path);
  reader.for_each([&](const CsvRow& row) {
    SyntheticPerson p;
    p.id = row.get_int("person_id");
    p.zone_id = row.get("zone_id");
    p.age_class = static_cast<int>(row.get_int("age_class"));
    p.sex = static_cast<int>(row.get_int("sex"));
    p.labour_force_status = static_cast<int>(row.get_int("labour_force_status"));
    p.income_class = static_cast<int>(row.get_int("income_class"));
    p.qualification_class = static_cast<int>(row.get_int("qualification_class"));
    p.household_size_class = static_cast<int>(row.get_int("household_size_class"));
    p.children_present = row.get_bool("children_present");
    p.household_type = static_cast<int>(row.get_int("household_type"));
    p.maintainer_flag = row.get_bool("maintainer");
    p.health = static_cast<int>(row.get_int("health"));
    p.has_license = row.get_bool("has_license");
    p.age = static_cast<int>(row.get_int("age"));
    p.household = row.get_int("household");
    out.push_back(std::move(p));
  });
  return out;
}

inline void save_households(const std::vector<Household>& households, const std::string& path) {
  CsvWriter w(path, {"household_id", "zone_id", "maintainer", "residence_facility", "members"});
  for (const auto& h : households) {
    std::string members;
    for (PersonId m : h.members) {
      if (!members.empty()) members += '|';
      members += std::to_string(m);
    }
    w.write_row({std::to_string(h.id), h.zone_id, std::to_string(h.maintainer),
                 h.residence_facility, members});
  }
}

inline std::vector<Household> load_households(const std::string& path) {
  std::vector<Household> out;
  CsvReader reader(path);
  reader.for_each([&](const CsvRow& row) {
    Household h;
    h.id = row.get_int("household_id");
    h.zone_id = row.get("zone_id");
    h.maintainer = row.get_int("maintainer");
    h.residence_facility = row.get("residence_facility");
    std::string cur;
    for (char c : row.get("members")) {
      if (c == '|') {
        if (!cur.empty()) h.members.push_back(std::stoll(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) h.members.push_back(std::stoll(cur));
    out.push_back(std::move(h));
  });
  return out;
}

inline void save_matches(const std::map<PersonId, DiaryId>& matches, const std::string& path) {
  CsvWriter w(path, {"person_id", "diary_id"});
  for (const auto& [person, diary] : matches)
    w.write_row({std::to_string(person), std::to_string(diary)});
}

inline std::map<PersonId, DiaryId> load_matches(const std::string& path) {
  std::map<PersonId, DiaryId> out;
  CsvReader reader(path);
  reader.for_each([&](const CsvRow& row) {
    out[row.get_int("person_id")] = row.get_int("diary_id");
  });
  return out;
}

}  // namespace daytrip
