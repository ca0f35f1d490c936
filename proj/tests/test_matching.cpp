#include <catch2/catch_amalgamated.hpp>

#include <limits>

#include "daytrip/matching.hpp"
#include "daytrip/rng.hpp"

using namespace daytrip;

namespace {

Codebook small_book() {
  return {
      {"age_class", true, 2.0},
      {"sex", false, 1.0},
      {"labour_force_status", false, 1.5},
      {"income_class", true, 1.0},
      {"has_license", false, 2.0},
  };
}

SyntheticPerson random_person(Rng& rng, PersonId id) {
  SyntheticPerson p;
  p.id = id;
  p.age_class = static_cast<int>(rng.next_below(18));
  p.sex = static_cast<int>(rng.next_below(2));
  p.labour_force_status = static_cast<int>(rng.next_below(3));
  p.income_class = static_cast<int>(rng.next_below(5));
  p.qualification_class = static_cast<int>(rng.next_below(4));
  p.household_size_class = static_cast<int>(rng.next_below(5));
  p.children_present = rng.next_below(2) == 1;
  p.health = static_cast<int>(rng.next_below(3));
  p.has_license = rng.next_below(2) == 1;
  return p;
}

DiaryRecord random_diary(Rng& rng, DiaryId id) {
  DiaryRecord d;
  d.id = id;
  d.age_class = static_cast<int>(rng.next_below(18));
  d.sex = static_cast<int>(rng.next_below(2));
  d.labour_force_status = static_cast<int>(rng.next_below(3));
  d.income_class = static_cast<int>(rng.next_below(5));
  d.qualification_class = static_cast<int>(rng.next_below(4));
  d.household_size_class = static_cast<int>(rng.next_below(5));
  d.children_present = rng.next_below(2) == 1;
  d.health = static_cast<int>(rng.next_below(3));
  d.has_license = rng.next_below(2) == 1;
  return d;
}

// The reference answer: scan every diary, smallest distance wins, ties to the
// smallest diary id.
std::pair<DiaryId, double> exhaustive_nearest(const SyntheticPerson& p,
                                              const std::vector<DiaryRecord>& diaries,
                                              const Codebook& book) {
  DiaryId best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& d : diaries) {
    double dist = match_distance(p, d, book);
    if (dist < best_d || (dist == best_d && d.id < best)) {
      best = d.id;
      best_d = dist;
    }
  }
  return {best, best_d};
}

}  // namespace

TEST_CASE("match distance weights ordinal shifts and nominal flips", "[matching]") {
  Codebook book = small_book();
  SyntheticPerson p;
  p.age_class = 10;
  p.sex = 0;
  p.labour_force_status = 1;
  p.income_class = 2;
  p.has_license = true;

  DiaryRecord d;
  d.age_class = 7;   // ordinal, |10-7| * 2.0 = 6.0
  d.sex = 1;         // nominal flip, + 1.0
  d.labour_force_status = 1;
  d.income_class = 4;  // ordinal, |2-4| * 1.0 = 2.0
  d.has_license = false;  // nominal flip, + 2.0

  CHECK(match_distance(p, d, book) == Catch::Approx(11.0).margin(1e-12));

  d.age_class = 10;
  d.sex = 0;
  d.income_class = 2;
  d.has_license = true;
  CHECK(match_distance(p, d, book) == 0.0);
}

TEST_CASE("tree search equals exhaustive search with tie-breaks", "[matching]") {
  Rng rng(2024);
  std::vector<DiaryRecord> diaries;
  for (int i = 0; i < 120; ++i) diaries.push_back(random_diary(rng, 1000 + i));
  Codebook book = small_book();
  DiaryMatcher matcher(diaries, book);

  for (int i = 0; i < 400; ++i) {
    SyntheticPerson p = random_person(rng, i);
    auto want = exhaustive_nearest(p, diaries, book);
    auto got = matcher.nearest(p);
    INFO("person " << i);
    CHECK(got.diary == want.first);
    CHECK(got.distance == want.second);
  }
}

TEST_CASE("duplicated diaries resolve to the smallest id", "[matching]") {
  Rng rng(5);
  DiaryRecord base = random_diary(rng, 50);
  std::vector<DiaryRecord> diaries;
  for (DiaryId id : {30, 10, 20}) {
    DiaryRecord copy = base;
    copy.id = id;
    diaries.push_back(copy);
  }
  Codebook book = small_book();
  DiaryMatcher matcher(diaries, book);

  SyntheticPerson p = random_person(rng, 1);
  auto got = matcher.nearest(p);
  CHECK(got.diary == 10);
}

TEST_CASE("population matching is deterministic and complete", "[matching]") {
  Rng rng(909);
  std::vector<DiaryRecord> diaries;
  for (int i = 0; i < 60; ++i) diaries.push_back(random_diary(rng, i));
  std::vector<SyntheticPerson> persons;
  for (int i = 0; i < 150; ++i) persons.push_back(random_person(rng, i));
  Codebook book = small_book();

  auto a = match_population(persons, diaries, book, 1);
  auto b = match_population(persons, diaries, book, 3);
  REQUIRE(a.size() == persons.size());
  CHECK(a == b);
  for (const auto& p : persons) {
    auto want = exhaustive_nearest(p, diaries, book);
    CHECK(a.at(p.id) == want.first);
  }
}
