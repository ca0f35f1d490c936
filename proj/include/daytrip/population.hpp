#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/csv.hpp"

namespace daytrip {

// Categorical codebooks are small integer codes; labels and ordinal flags live
// in codebook.csv. Age classes are 5-year bands: 0 -> [0,4], ..., 17 -> 85+.
constexpr int kNumAgeClasses = 18;
constexpr int kSeniorAgeClass = 13;  // 65-69
constexpr int kSeniorAge = 65;

inline int age_class_lo(int age_class) { return age_class * 5; }
inline int age_class_hi(int age_class) { return age_class == kNumAgeClasses - 1 ? 99 : age_class * 5 + 4; }

// Household size classes: 0..3 -> 1..4 persons, 4 -> 5 or more (open-ended).
constexpr int kOpenHouseholdSizeClass = 4;
inline int household_size_from_class(int size_class) { return size_class + 1; }

struct MicroPerson {
  std::int64_t record_id = 0;
  int age_class = 0;
  int sex = 0;  // 0 female, 1 male
  int labour_force_status = 0;
  int income_class = 0;
  int qualification_class = 0;
  int household_size_class = 0;
  bool children_present = false;
  int household_type = 0;
  bool maintainer_flag = false;
};

struct SyntheticPerson {
  PersonId id = -1;
  std::string zone_id;
  int age_class = 0;
  int sex = 0;
  int labour_force_status = 0;
  int income_class = 0;
  int qualification_class = 0;
  int household_size_class = 0;
  bool children_present = false;
  int household_type = 0;
  bool maintainer_flag = false;
  int health = 1;            // 0 poor/fair, 1 good, 2 very good/excellent
  bool has_license = false;
  int age = 0;               // years, sampled within age_class
  HouseholdId household = -1;

  bool is_senior() const { return age >= kSeniorAge; }
};

struct Household {
  HouseholdId id = -1;
  std::string zone_id;
  PersonId maintainer = -1;
  std::vector<PersonId> members;  // includes the maintainer
  std::string residence_facility;
};

// Attribute access by name, shared by IPF and validation.
inline int micro_attr(const MicroPerson& p, const std::string& attr) {
  if (attr == "age_class") return p.age_class;
  if (attr == "sex") return p.sex;
  if (attr == "labour_force_status") return p.labour_force_status;
  if (attr == "income_class") return p.income_class;
  if (attr == "qualification_class") return p.qualification_class;
  if (attr == "household_size_class") return p.household_size_class;
  if (attr == "children_present") return p.children_present ? 1 : 0;
  if (attr == "household_type") return p.household_type;
  if (attr == "maintainer") return p.maintainer_flag ? 1 : 0;
  throw Error("unknown micro attribute: " + attr);
}

// Zone marginals: attribute -> per-category expected counts.
struct ZoneMarginals {
  std::string zone_id;
  std::map<std::string, std::vector<double>> counts;
};

inline std::vector<MicroPerson> load_micro_persons(const std::string& path) {
  std::vector<MicroPerson> out;
  CsvReader reader(path);
  reader.for_each([&](const CsvRow& row) {
    MicroPerson p;
    p.record_id = row.get_int("record_id");
    p.age_class = static_cast<int>(row.get_int("age_class"));
    p.sex = static_cast<int>(row.get_int("sex"));
    p.labour_force_status = static_cast<int>(row.get_int("labour_force_status"));
    p.income_class = static_cast<int>(row.get_int("income_class"));
    p.qualification_class = static_cast<int>(row.get_int("qualification_class"));
    p.household_size_class = static_cast<int>(row.get_int("household_size_class"));
    p.children_present = row.get_bool("children_present");
    p.household_type = static_cast<int>(row.get_int("household_type"));
    p.maintainer_flag = row.get_bool("maintainer");
    out.push_back(p);
  });
  return out;
}

inline std::vector<ZoneMarginals> load_marginals(const std::string& path) {
  std::map<std::string, ZoneMarginals> zones;
  CsvReader reader(path);
  reader.for_each([&](const CsvRow& row) {
    const std::string zone = row.get("zone_id");
    const std::string attr = row.get("attribute");
    const int category = static_cast<int>(row.get_int("category"));
    const double count = row.get_double("count");
    if (category < 0 || count < 0)
      throw Error(path + ":" + std::to_string(row.line_number()) +
                  ": category and count must be non-negative");
    ZoneMarginals& z = zones[zone];
    z.zone_id = zone;
    auto& vec = z.counts[attr];
    if (static_cast<int>(vec.size()) <= category) vec.resize(category + 1, 0.0);
    vec[category] += count;
  });
  std::vector<ZoneMarginals> out;
  out.reserve(zones.size());
  for (auto& [_, z] : zones) out.push_back(std::move(z));
  return out;
}

// Projection targets: (age_class, sex) -> person count.
struct ProjectionTargets {
  std::map<std::pair<int, int>, std::int64_t> cells;
};

inline ProjectionTargets load_projections(const std::string& path) {
  ProjectionTargets t;
  CsvReader reader(path);
  reader.for_each([&](const CsvRow& row) {
    int ac = static_cast<int>(row.get_int("age_class"));
    int sex = static_cast<int>(row.get_int("sex"));
    t.cells[{ac, sex}] = row.get_int("count");
  });
  return t;
}

// Conditional probability tables keyed on (age_class, sex). The `value` column
// is an integer code for health/license tables and an "age_class:sex" pair for
// the household member profile table.
struct ConditionalTable {
  // (age_class, sex) -> list of (value code, probability)
  std::map<std::pair<int, int>, std::vector<std::pair<std::string, double>>> rows;
};

struct AttributeTables {
  std::map<std::string, ConditionalTable> tables;  // table name -> table

  const ConditionalTable& require(const std::string& name) const {
    auto it = tables.find(name);
    if (it == tables.end()) throw Error("attribute table '" + name + "' not found");
    return it->second;
  }
};

inline AttributeTables load_attribute_tables(const std::string& path) {
  AttributeTables out;
  CsvReader reader(path);
  reader.for_each([&](const CsvRow& row) {
    const std::string table = row.get("table");
    int ac = static_cast<int>(row.get_int("age_class"));
    int sex = static_cast<int>(row.get_int("sex"));
    out.tables[table].rows[{ac, sex}].emplace_back(row.get("value"), row.get_double("p"));
  });
  return out;
}

}  // namespace daytrip
