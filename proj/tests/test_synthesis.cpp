#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>

#include "daytrip/fixtures.hpp"
#include "daytrip/synthesis.hpp"

using namespace daytrip;

namespace {

MicroPerson micro(int id, int sex, bool children) {
  MicroPerson p;
  p.record_id = id;
  p.sex = sex;
  p.children_present = children;
  return p;
}

}  // namespace

TEST_CASE("ipf reproduces the closed-form 2x2 fit", "[synthesis]") {
  std::vector<MicroPerson> records = {
      micro(0, 0, false), micro(1, 0, true), micro(2, 1, false), micro(3, 1, true)};
  ZoneMarginals m;
  m.zone_id = "z";
  m.counts["sex"] = {3.0, 1.0};
  m.counts["children_present"] = {2.0, 2.0};

  IpfResult r = fit_ipf(records, m);
  REQUIRE(r.weights.size() == 4);
  CHECK(r.converged);
  CHECK(std::abs(r.weights[0] - 1.5) < 1e-9);
  CHECK(std::abs(r.weights[1] - 1.5) < 1e-9);
  CHECK(std::abs(r.weights[2] - 0.5) < 1e-9);
  CHECK(std::abs(r.weights[3] - 0.5) < 1e-9);
  CHECK(r.max_deviation <= 1e-6);
}

TEST_CASE("ipf converges on random consistent four-attribute tables", "[synthesis]") {
  Rng rng(404);
  for (int trial = 0; trial < 10; ++trial) {
    const int cats[4] = {static_cast<int>(2 + rng.next_below(4)),
                         static_cast<int>(2 + rng.next_below(4)),
                         static_cast<int>(2 + rng.next_below(4)),
                         static_cast<int>(2 + rng.next_below(4))};
    std::vector<MicroPerson> records;
    std::vector<double> truth;
    for (int i = 0; i < 80; ++i) {
      MicroPerson p;
      p.record_id = i;
      p.age_class = static_cast<int>(rng.next_below(cats[0]));
      p.sex = static_cast<int>(rng.next_below(cats[1]));
      p.income_class = static_cast<int>(rng.next_below(cats[2]));
      p.household_size_class = static_cast<int>(rng.next_below(cats[3]));
      records.push_back(p);
      truth.push_back(0.2 + 3.0 * rng.next_double());
    }
    ZoneMarginals m;
    m.zone_id = "z";
    m.counts["age_class"] = std::vector<double>(cats[0], 0.0);
    m.counts["sex"] = std::vector<double>(cats[1], 0.0);
    m.counts["income_class"] = std::vector<double>(cats[2], 0.0);
    m.counts["household_size_class"] = std::vector<double>(cats[3], 0.0);
    for (size_t i = 0; i < records.size(); ++i) {
      m.counts["age_class"][records[i].age_class] += truth[i];
      m.counts["sex"][records[i].sex] += truth[i];
      m.counts["income_class"][records[i].income_class] += truth[i];
      m.counts["household_size_class"][records[i].household_size_class] += truth[i];
    }
    IpfResult r = fit_ipf(records, m, 1e-6, 100);
    INFO("trial " << trial);
    CHECK(r.converged);
    CHECK(r.max_deviation <= 1e-6);
    CHECK(r.iterations <= 100);
  }
}

TEST_CASE("integerization preserves the rounded total with bounded counts", "[synthesis]") {
  Rng rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> w(40);
    for (auto& x : w) x = 4.0 * rng.next_double();
    auto counts = integerize_quasirandom(w, 1000 + trial);
    auto again = integerize_quasirandom(w, 1000 + trial);
    CHECK(counts == again);

    long double total_w = 0.0L;
    std::int64_t total_c = 0;
    for (size_t i = 0; i < w.size(); ++i) {
      total_w += w[i];
      total_c += counts[i];
      std::int64_t lo = static_cast<std::int64_t>(std::floor(w[i]));
      CHECK(counts[i] >= lo);
      CHECK(counts[i] <= lo + 1);
    }
    CHECK(total_c == std::llround(static_cast<double>(total_w)));
  }
}

TEST_CASE("integerization keeps exact integers untouched", "[synthesis]") {
  std::vector<double> w = {2.0, 0.0, 3.0, 1.0};
  auto counts = integerize_quasirandom(w, 9);
  CHECK(counts == std::vector<std::int64_t>({2, 0, 3, 1}));
}

TEST_CASE("integerization rejects invalid weights", "[synthesis]") {
  CHECK_THROWS_AS(integerize_quasirandom({-0.5}, 1), Error);
  CHECK_THROWS_AS(integerize_quasirandom({1.0, 2.2}, 1, 99), Error);
}

TEST_CASE("age sampling stays inside each five-year class band", "[synthesis]") {
  std::vector<SyntheticPerson> ps;
  for (int ac = 0; ac < kNumAgeClasses; ++ac) {
    for (int k = 0; k < 20; ++k) {
      SyntheticPerson p;
      p.id = ac * 100 + k;
      p.age_class = ac;
      ps.push_back(p);
    }
  }
  sample_ages(ps, 3);
  for (const auto& p : ps) {
    int lo = p.age_class * 5;
    int hi = p.age_class == kNumAgeClasses - 1 ? 120 : lo + 4;
    CHECK(p.age >= lo);
    CHECK(p.age <= hi);
    CHECK(p.is_senior() == (p.age >= 65));
  }
}

TEST_CASE("full synthesis fills the town with consistent people", "[synthesis]") {
  auto town = fixtures::make_mini_town(7);
  SynthesisResult result =
      run_synthesis(town.micro, town.marginals, town.projections, town.attributes,
                    town.scenario.facilities, 11, SynthesisConfig{}, 2);

  REQUIRE(!result.persons.empty());
  REQUIRE(!result.households.empty());

  std::map<std::string, std::int64_t> zone_counts;
  std::set<PersonId> ids;
  for (const auto& p : result.persons) {
    CHECK(ids.insert(p.id).second);
    zone_counts[p.zone_id] += 1;
    CHECK(p.age >= p.age_class * 5);
    CHECK((p.health >= 0 && p.health <= 2));
    if (p.age_class <= 2) CHECK(!p.has_license);
  }

  // Projection only scales 65+ cells up, so each zone should exceed its
  // base marginal total without doubling it.
  for (const auto& zm : town.marginals) {
    double base = 0;
    for (double c : zm.counts.at("sex")) base += c;
    auto it = zone_counts.find(zm.zone_id);
    REQUIRE(it != zone_counts.end());
    CHECK(it->second >= std::llround(base) - 1);
    CHECK(it->second < std::llround(base * 1.5));
  }

  std::map<HouseholdId, const Household*> hh;
  for (const auto& h : result.households) {
    hh[h.id] = &h;
    REQUIRE(!h.members.empty());
    CHECK(std::find(h.members.begin(), h.members.end(), h.maintainer) != h.members.end());
    CHECK(!h.residence_facility.empty());
    const Facility& f = town.scenario.facility(h.residence_facility);
    CHECK(f.types.contains(FacilityType::residence));
  }
  for (const auto& p : result.persons) {
    auto it = hh.find(p.household);
    REQUIRE(it != hh.end());
    CHECK(it->second->zone_id == p.zone_id);
  }
}

TEST_CASE("synthesis is reproducible for a fixed seed", "[synthesis]") {
  auto town = fixtures::make_mini_town(7);
  auto a = run_synthesis(town.micro, town.marginals, town.projections, town.attributes,
                         town.scenario.facilities, 21, SynthesisConfig{}, 1);
  auto b = run_synthesis(town.micro, town.marginals, town.projections, town.attributes,
                         town.scenario.facilities, 21, SynthesisConfig{}, 4);
  REQUIRE(a.persons.size() == b.persons.size());
  for (size_t i = 0; i < a.persons.size(); ++i) {
    CHECK(a.persons[i].id == b.persons[i].id);
    CHECK(a.persons[i].age == b.persons[i].age);
    CHECK(a.persons[i].has_license == b.persons[i].has_license);
    CHECK(a.persons[i].household == b.persons[i].household);
  }
  REQUIRE(a.households.size() == b.households.size());
  for (size_t i = 0; i < a.households.size(); ++i) {
    CHECK(a.households[i].residence_facility == b.households[i].residence_facility);
    CHECK(a.households[i].members == b.households[i].members);
  }
}
