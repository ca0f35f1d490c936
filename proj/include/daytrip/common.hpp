#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace daytrip {

// Times are seconds from midnight, distances meters, speeds m/s unless a
// field name says otherwise (mode speed tables are m/min to match the
// diary minute grid).
using Time = double;
using PersonId = std::int64_t;
using HouseholdId = std::int64_t;
using DiaryId = std::int64_t;

constexpr Time kSecondsPerDay = 86400.0;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double euclidean(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

enum class Mode : std::uint8_t { car, ride, pt, walk, bike, amod };

constexpr const char* kModeNames[] = {"car", "ride", "pt", "walk", "bike", "amod"};
constexpr int kNumModes = 6;
// Network/teleport modes available to plan mutation (amod is gated separately).
constexpr Mode kChoiceModes[] = {Mode::car, Mode::ride, Mode::pt, Mode::walk, Mode::bike};

inline std::string_view to_string(Mode m) { return kModeNames[static_cast<int>(m)]; }
inline const char* mode_name(Mode m) { return kModeNames[static_cast<int>(m)]; }

inline std::optional<Mode> parse_mode(std::string_view s) {
  for (int i = 0; i < kNumModes; ++i)
    if (s == kModeNames[i]) return static_cast<Mode>(i);
  return std::nullopt;
}

enum class ActivityType : std::uint8_t {
  home,
  work,
  education,
  shopping,
  medical,
  eat_out,
  social,
  entertain,
  exercise,
  escort,
  other
};

constexpr const char* kActivityNames[] = {"home",    "work",   "education", "shopping",
                                          "medical", "eat_out", "social",    "entertain",
                                          "exercise", "escort", "other"};
constexpr int kNumActivityTypes = 11;

inline std::string_view to_string(ActivityType t) { return kActivityNames[static_cast<int>(t)]; }
inline const char* activity_type_name(ActivityType t) {
  return kActivityNames[static_cast<int>(t)];
}

inline std::optional<ActivityType> parse_activity_type(std::string_view s) {
  for (int i = 0; i < kNumActivityTypes; ++i)
    if (s == kActivityNames[i]) return static_cast<ActivityType>(i);
  return std::nullopt;
}

// Strict variants for deserializing our own artifacts, where an unknown name
// is a corrupt file rather than user input.
inline Mode mode_from_name(std::string_view s) {
  auto m = parse_mode(s);
  if (!m) throw Error("unknown mode '" + std::string(s) + "'");
  return *m;
}

inline ActivityType activity_type_from_name(std::string_view s) {
  auto t = parse_activity_type(s);
  if (!t) throw Error("unknown activity type '" + std::string(s) + "'");
  return *t;
}

enum class FacilityType : std::uint16_t {
  industrial,
  civic,
  sport,
  sustenance,
  education,
  transport,
  financial,
  healthcare,
  entertainment,
  shop,
  office,
  residence,
  other
};

constexpr const char* kFacilityTypeNames[] = {
    "industrial", "civic",      "sport",         "sustenance", "education",
    "transport",  "financial",  "healthcare",    "entertainment", "shop",
    "office",     "residence",  "other"};
constexpr int kNumFacilityTypes = 13;

inline std::string_view to_string(FacilityType t) {
  return kFacilityTypeNames[static_cast<int>(t)];
}

inline std::optional<FacilityType> parse_facility_type(std::string_view s) {
  for (int i = 0; i < kNumFacilityTypes; ++i)
    if (s == kFacilityTypeNames[i]) return static_cast<FacilityType>(i);
  return std::nullopt;
}

// Bit set over FacilityType, small enough to copy by value.
struct FacilityTypeSet {
  std::uint16_t bits = 0;

  void insert(FacilityType t) { bits |= static_cast<std::uint16_t>(1u << static_cast<int>(t)); }
  bool contains(FacilityType t) const {
    return (bits >> static_cast<int>(t)) & 1u;
  }
  bool empty() const { return bits == 0; }
  bool intersects(const FacilityTypeSet& o) const { return (bits & o.bits) != 0; }

  std::vector<FacilityType> to_vector() const {
    std::vector<FacilityType> out;
    for (int i = 0; i < kNumFacilityTypes; ++i)
      if ((bits >> i) & 1u) out.push_back(static_cast<FacilityType>(i));
    return out;
  }
};

}  // namespace daytrip
