#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <string>
#include <vector>

#include "daytrip/report.hpp"
#include "tests/temp.hpp"

using namespace daytrip;

namespace {

Event ev(EventKind kind, Time t, PersonId person, const std::string& mode = "",
         const std::string& info = "", double distance = -1) {
  Event e;
  e.kind = kind;
  e.time = t;
  e.person = person;
  e.mode = mode;
  e.info = info;
  e.distance = distance;
  return e;
}

SyntheticPerson person(PersonId id, int age, int sex, bool license) {
  SyntheticPerson p;
  p.id = id;
  p.age = age;
  p.sex = sex;
  p.has_license = license;
  return p;
}

std::vector<Event> sample_events() {
  std::vector<Event> events;
  // Person 1: home -> work by car, then a walk home without an act_start tail.
  events.push_back(ev(EventKind::act_end, 28800, 1, "", "home"));
  events.push_back(ev(EventKind::depart, 28800, 1, "car"));
  events.push_back(ev(EventKind::arrive, 30000, 1, "car", "", 8000));
  events.push_back(ev(EventKind::act_start, 30000, 1, "", "work"));
  events.push_back(ev(EventKind::act_end, 61200, 1, "", "work"));
  events.push_back(ev(EventKind::depart, 61200, 1, "walk"));
  events.push_back(ev(EventKind::arrive, 62500, 1, "walk", "", 1300));
  // Person 2: one amod trip with purpose shopping.
  events.push_back(ev(EventKind::depart, 36000, 2, "amod"));
  events.push_back(ev(EventKind::arrive, 36600, 2, "amod", "", 2500));
  events.push_back(ev(EventKind::act_start, 36600, 2, "", "shopping"));
  // Person 3: departs but gets stuck, so no trip is recorded.
  events.push_back(ev(EventKind::depart, 40000, 3, "bike"));
  events.push_back(ev(EventKind::stuck, 108000, 3, "bike", "end_of_day"));
  sort_events(events);
  return events;
}

}  // namespace

TEST_CASE("trips are reconstructed from event pairs", "[report]") {
  std::vector<SyntheticPerson> persons = {person(1, 40, 1, true), person(2, 70, 0, false),
                                          person(3, 30, 0, true)};
  auto trips = extract_trips(sample_events(), population_info(persons));

  REQUIRE(trips.size() == 3);
  REQUIRE(trips[0].person == 1);
  REQUIRE(trips[0].mode == Mode::car);
  REQUIRE(trips[0].purpose == "work");
  REQUIRE(trips[0].depart == 28800);
  REQUIRE(trips[0].arrive == 30000);
  REQUIRE(trips[0].distance == 8000);
  REQUIRE(trips[0].age == 40);
  REQUIRE_FALSE(trips[0].senior);

  REQUIRE(trips[1].person == 2);
  REQUIRE(trips[1].mode == Mode::amod);
  REQUIRE(trips[1].purpose == "shopping");
  REQUIRE(trips[1].senior);
  REQUIRE_FALSE(trips[1].has_license);

  REQUIRE(trips[2].person == 1);
  REQUIRE(trips[2].mode == Mode::walk);
  REQUIRE(trips[2].purpose.empty());  // day ended without a following activity
}

TEST_CASE("modal share normalizes and supports filters", "[report]") {
  std::vector<SyntheticPerson> persons = {person(1, 40, 1, true), person(2, 70, 0, false),
                                          person(3, 30, 0, true)};
  auto trips = extract_trips(sample_events(), population_info(persons));

  auto shares = modal_share(trips);
  REQUIRE(shares.at(Mode::car) == Catch::Approx(1.0 / 3.0));
  REQUIRE(shares.at(Mode::walk) == Catch::Approx(1.0 / 3.0));
  REQUIRE(shares.at(Mode::amod) == Catch::Approx(1.0 / 3.0));
  double total = 0;
  for (const auto& [m, s] : shares) total += s;
  REQUIRE(total == Catch::Approx(1.0));

  auto seniors = modal_share(trips, [](const TripRecord& t) { return t.senior; });
  REQUIRE(seniors.at(Mode::amod) == Catch::Approx(1.0));

  REQUIRE_THROWS_AS(modal_share(trips, [](const TripRecord&) { return false; }), Error);
}

TEST_CASE("histogram, purposes and age bands", "[report]") {
  std::vector<SyntheticPerson> persons = {person(1, 40, 1, true), person(2, 70, 0, false),
                                          person(3, 30, 0, true)};
  auto trips = extract_trips(sample_events(), population_info(persons));

  auto hist = start_time_histogram(trips);
  REQUIRE(hist[8] == 1);   // 28800
  REQUIRE(hist[10] == 1);  // 36000
  REQUIRE(hist[17] == 1);  // 61200
  std::int64_t total = 0;
  for (auto b : hist) total += b;
  REQUIRE(total == 3);

  auto purposes = purpose_counts(trips);
  REQUIRE(purposes.at("work") == 1);
  REQUIRE(purposes.at("shopping") == 1);
  REQUIRE(purposes.at("other") == 1);  // empty purpose folds into other

  REQUIRE(std::string(age_band(8)) == "under_11");
  REQUIRE(std::string(age_band(11)) == "11_64");
  REQUIRE(std::string(age_band(64)) == "11_64");
  REQUIRE(std::string(age_band(65)) == "65_74");
  REQUIRE(std::string(age_band(74)) == "65_74");
  REQUIRE(std::string(age_band(75)) == "75_plus");
}

TEST_CASE("mobility indicators cover per-capita, durations and staying home", "[report]") {
  std::vector<SyntheticPerson> persons = {person(1, 40, 1, true), person(2, 70, 0, false),
                                          person(3, 30, 0, true), person(4, 80, 0, false)};
  auto trips = extract_trips(sample_events(), population_info(persons));
  auto rows = mobility_indicators(trips, persons);
  std::map<std::string, double> m(rows.begin(), rows.end());

  REQUIRE(m.at("trips_per_capita_11_plus") == Catch::Approx(3.0 / 4.0));
  REQUIRE(m.at("trips_per_capita_11_64") == Catch::Approx(2.0 / 2.0));
  REQUIRE(m.at("trips_per_capita_65_74") == Catch::Approx(1.0));
  REQUIRE(m.at("trips_per_capita_75_plus") == Catch::Approx(0.0));
  REQUIRE(m.at("mean_trip_duration_s_work") == Catch::Approx(1200.0));
  REQUIRE(m.at("mean_trip_duration_s_shopping") == Catch::Approx(600.0));
  REQUIRE(m.at("mean_car_trip_length_m") == Catch::Approx(8000.0));
  // Person 4 (80, female, unlicensed) never left home; person 3 departed but
  // never completed a trip, so for indicator purposes they also stayed home.
  REQUIRE(m.at("stay_at_home_share_75_plus_sex0_lic0") == Catch::Approx(1.0));
  REQUIRE(m.at("stay_at_home_share_11_64_sex0_lic1") == Catch::Approx(1.0));
  REQUIRE(m.at("stay_at_home_share_11_64_sex1_lic1") == Catch::Approx(0.0));
}

TEST_CASE("amod user demographics", "[report]") {
  std::vector<SyntheticPerson> persons = {person(1, 40, 1, true), person(2, 70, 0, false),
                                          person(3, 78, 0, false)};
  std::vector<DrtRequestRecord> requests(3);
  requests[0].id = 0;
  requests[0].person = 2;
  requests[0].state = RequestState::completed;
  requests[1].id = 1;
  requests[1].person = 3;
  requests[1].state = RequestState::completed;
  requests[2].id = 2;
  requests[2].person = 2;
  requests[2].state = RequestState::rejected;

  auto rows = amod_user_stats(requests, persons);
  std::map<std::string, double> m(rows.begin(), rows.end());
  REQUIRE(m.at("requests") == 3.0);
  REQUIRE(m.at("served") == 2.0);
  REQUIRE(m.at("rejected") == 1.0);
  REQUIRE(m.at("users") == 2.0);
  REQUIRE(m.at("user_mean_age") == Catch::Approx(74.0));
  REQUIRE(m.at("user_share_female") == Catch::Approx(1.0));
  REQUIRE(m.at("user_share_unlicensed") == Catch::Approx(1.0));
  REQUIRE(m.at("user_share_75_plus") == Catch::Approx(0.5));
}

TEST_CASE("keyed stats aggregate across seeds with zero fill", "[report]") {
  testutil::TempDir dir;
  std::string path = dir.file("stats.csv");
  std::vector<std::map<std::string, double>> per_seed = {
      {{"a", 1.0}, {"b", 4.0}},
      {{"a", 3.0}},  // b missing -> 0
  };
  write_keyed_stats_csv(path, "metric", per_seed);

  CsvReader r(path);
  std::map<std::string, std::array<double, 3>> got;
  r.for_each([&](const CsvRow& row) {
    got[row.get("metric")] = {row.get_double("mean"), row.get_double("min"),
                              row.get_double("max")};
  });
  REQUIRE(got.at("a")[0] == Catch::Approx(2.0));
  REQUIRE(got.at("a")[1] == Catch::Approx(1.0));
  REQUIRE(got.at("a")[2] == Catch::Approx(3.0));
  REQUIRE(got.at("b")[0] == Catch::Approx(2.0));
  REQUIRE(got.at("b")[1] == Catch::Approx(0.0));
  REQUIRE(got.at("b")[2] == Catch::Approx(4.0));
}

TEST_CASE("seed reports render the summary files", "[report]") {
  testutil::TempDir dir;
  std::vector<SyntheticPerson> persons = {person(1, 40, 1, true), person(2, 70, 0, false),
                                          person(3, 30, 0, true)};
  auto trips = extract_trips(sample_events(), population_info(persons));
  std::vector<SeedReport> seeds = {{1, trips}, {2, trips}};

  write_modal_share_csv(dir.file("modal.csv"), seeds);
  write_purposes_csv(dir.file("purposes.csv"), seeds);
  write_start_times_csv(dir.file("start.csv"), seeds);
  write_indicators_csv(dir.file("indicators.csv"), seeds, persons);

  CsvReader modal(dir.file("modal.csv"));
  std::map<std::string, double> shares;
  modal.for_each([&](const CsvRow& row) { shares[row.get("mode")] = row.get_double("mean"); });
  REQUIRE(shares.size() == 3);
  REQUIRE(shares.at("car") == Catch::Approx(1.0 / 3.0));

  CsvReader start(dir.file("start.csv"));
  int rows = 0;
  double total = 0;
  start.for_each([&](const CsvRow& row) {
    ++rows;
    total += row.get_double("mean");
  });
  REQUIRE(rows == 24);
  REQUIRE(total == Catch::Approx(3.0));
}
