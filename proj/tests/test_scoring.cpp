#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "daytrip/scoring.hpp"

using namespace daytrip;

TEST_CASE("leg utilities match hand-computed values", "[scoring]") {
  ScoringParams p = ScoringParams::defaults();

  ExecutedLeg car;
  car.mode = Mode::car;
  car.depart = 0;
  car.arrive = 1800;  // half an hour
  car.distance = 12000;
  // -10 constant + (-6 utils/h * 0.5 h) = -13, distance plays no role for car.
  CHECK(leg_utility(car, p) == Catch::Approx(-13.0).margin(1e-9));

  ExecutedLeg walk;
  walk.mode = Mode::walk;
  walk.depart = 0;
  walk.arrive = 900;
  walk.distance = 800;
  // 0 constant + (-0.04 * 800 m) + (-6 * 0.25 h) = -33.5.
  CHECK(leg_utility(walk, p) == Catch::Approx(-33.5).margin(1e-9));

  ExecutedLeg bike;
  bike.mode = Mode::bike;
  bike.depart = 3600;
  bike.arrive = 4500;
  bike.distance = 2000;
  // -50 - 0.04*2000 - 36*0.25 = -139.
  CHECK(leg_utility(bike, p) == Catch::Approx(-139.0).margin(1e-9));

  ExecutedLeg pt;
  pt.mode = Mode::pt;
  pt.depart = 0;
  pt.arrive = 3600;
  pt.distance = 9000;
  CHECK(leg_utility(pt, p) == Catch::Approx(-231.0).margin(1e-9));

  ExecutedLeg amod;
  amod.mode = Mode::amod;
  amod.depart = 0;
  amod.arrive = 1800;
  CHECK(leg_utility(amod, p) == Catch::Approx(-13.0).margin(1e-9));  // car params

  ExecutedLeg stuck = car;
  stuck.stuck = true;
  CHECK(leg_utility(stuck, p) == -600.0);
  ExecutedLeg rejected = car;
  rejected.rejected = true;
  CHECK(leg_utility(rejected, p) == -600.0);
}

TEST_CASE("activity utility follows the logarithmic form", "[scoring]") {
  ScoringParams p = ScoringParams::defaults();

  // Work, 8 h typical: performing exactly t_typ hours scores
  // beta * t_typ * ln(t_typ / (t_typ * e^-1)) = beta * t_typ.
  CHECK(activity_utility(ActivityType::work, 8 * 3600.0, p) ==
        Catch::Approx(6.0 * 8.0).margin(1e-9));

  // Half the typical time: beta * t_typ * (1 + ln(0.5)).
  CHECK(activity_utility(ActivityType::work, 4 * 3600.0, p) ==
        Catch::Approx(6.0 * 8.0 * (1.0 + std::log(0.5))).margin(1e-9));

  // Shopping, 1 h typical, 30 min performed.
  CHECK(activity_utility(ActivityType::shopping, 1800, p) ==
        Catch::Approx(6.0 * 1.0 * (1.0 + std::log(0.5))).margin(1e-9));

  // Durations below the floor are clamped to one minute.
  CHECK(activity_utility(ActivityType::shopping, 0, p) ==
        activity_utility(ActivityType::shopping, 60, p));
}

TEST_CASE("day scores wrap the overnight activity", "[scoring]") {
  ScoringParams p = ScoringParams::defaults();

  ExecutedDay day;
  day.person = 1;
  ExecutedActivity home1;
  home1.type = ActivityType::home;
  home1.start = 0;
  home1.end = 28800;
  ExecutedActivity work;
  work.type = ActivityType::work;
  work.start = 30600;
  work.end = 59400;  // 8 h
  ExecutedActivity home2;
  home2.type = ActivityType::home;
  home2.start = 61200;
  day.activities = {home1, work, home2};
  ExecutedLeg l1;
  l1.mode = Mode::car;
  l1.depart = 28800;
  l1.arrive = 30600;
  ExecutedLeg l2 = l1;
  l2.depart = 59400;
  l2.arrive = 61200;
  day.legs = {l1, l2};

  const Time day_end = 30 * 3600.0;
  // Overnight home wraps: 8 h morning + (30 h - 17 h) evening = 21 h total.
  double home_hours = (28800.0 + (day_end - 61200.0)) / 3600.0;
  double expect = 2.0 * leg_utility(l1, p) +
                  activity_utility(ActivityType::home, home_hours * 3600.0, p) +
                  activity_utility(ActivityType::work, 8 * 3600.0, p);
  CHECK(score_day(day, p, day_end) == Catch::Approx(expect).margin(1e-9));

  // A day that never leaves home scores one long home block.
  ExecutedDay flat;
  ExecutedActivity home;
  home.type = ActivityType::home;
  flat.activities = {home};
  CHECK(score_day(flat, p, day_end) ==
        Catch::Approx(activity_utility(ActivityType::home, day_end, p)).margin(1e-9));
}

TEST_CASE("executed days are reconstructed from the event stream", "[scoring]") {
  std::vector<Event> events;
  auto ev = [&](Time t, EventKind k, PersonId person) -> Event& {
    Event e;
    e.time = t;
    e.kind = k;
    e.person = person;
    events.push_back(e);
    return events.back();
  };

  ev(28800, EventKind::act_end, 1).info = "home";
  {
    Event& e = ev(28800, EventKind::depart, 1);
    e.mode = "car";
  }
  {
    Event& e = ev(30000, EventKind::arrive, 1);
    e.mode = "car";
    e.distance = 8000;
  }
  ev(30000, EventKind::act_start, 1).info = "work";
  ev(60000, EventKind::act_end, 1).info = "work";
  {
    Event& e = ev(60000, EventKind::depart, 1);
    e.mode = "car";
  }
  {
    Event& e = ev(61500, EventKind::arrive, 1);
    e.mode = "car";
    e.distance = 8000;
  }
  ev(61500, EventKind::act_start, 1).info = "home";

  // A second person gets stuck mid-leg.
  ev(30600, EventKind::act_end, 2).info = "home";
  {
    Event& e = ev(30600, EventKind::depart, 2);
    e.mode = "walk";
  }
  {
    Event& e = ev(108000, EventKind::stuck, 2);
    e.mode = "walk";
  }

  sort_events(events);
  auto days = extract_days(events);
  REQUIRE(days.size() == 2);

  const ExecutedDay& d1 = days.at(1);
  REQUIRE(d1.legs.size() == 2);
  REQUIRE(d1.activities.size() == 3);
  CHECK(d1.activities[0].type == ActivityType::home);
  CHECK(d1.activities[0].start == 0);
  CHECK(d1.activities[0].end == 28800);
  CHECK(d1.activities[1].type == ActivityType::work);
  CHECK(d1.activities[1].start == 30000);
  CHECK(d1.activities[1].end == 60000);
  CHECK(d1.legs[0].mode == Mode::car);
  CHECK(d1.legs[0].distance == 8000);
  CHECK(!d1.legs[0].stuck);

  const ExecutedDay& d2 = days.at(2);
  REQUIRE(d2.legs.size() == 1);
  CHECK(d2.legs[0].stuck);
  CHECK(d2.legs[0].mode == Mode::walk);

  // The stuck penalty dominates that person's score.
  ScoringParams p = ScoringParams::defaults();
  CHECK(score_day(d2, p) < score_day(d1, p));
  CHECK(leg_utility(d2.legs[0], p) == -600.0);
}

TEST_CASE("drt rejections score as stranded legs", "[scoring]") {
  std::vector<Event> events;
  Event req;
  req.time = 30000;
  req.kind = EventKind::act_end;
  req.person = 9;
  req.info = "home";
  events.push_back(req);
  Event rej;
  rej.time = 30000;
  rej.kind = EventKind::drt_reject;
  rej.person = 9;
  rej.mode = "amod";
  rej.info = "no_feasible_insertion";
  events.push_back(rej);

  sort_events(events);
  auto days = extract_days(events);
  REQUIRE(days.count(9) == 1);
  REQUIRE(days.at(9).legs.size() == 1);
  CHECK(days.at(9).legs[0].rejected);
  ScoringParams p = ScoringParams::defaults();
  CHECK(leg_utility(days.at(9).legs[0], p) == -600.0);
}
