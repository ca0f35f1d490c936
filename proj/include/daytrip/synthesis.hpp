#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/parallel.hpp"
#include "daytrip/population.hpp"
#include "daytrip/rng.hpp"
#include "daytrip/scenario.hpp"

namespace daytrip {

struct IpfResult {
  std::vector<double> weights;
  int iterations = 0;
  double max_deviation = 0.0;
  bool converged = false;
};

// Iterative proportional fitting of record weights against one zone's
// marginals. Each pass rescales category slices attribute by attribute until
// every marginal is matched within `tolerance` or `max_iterations` is hit.
inline IpfResult fit_ipf(const std::vector<MicroPerson>& records,
                         const ZoneMarginals& marginals,
                         double tolerance = 1e-6, int max_iterations = 100) {
  if (records.empty()) throw Error("fit_ipf: no microdata records");

  // Precompute category membership per attribute.
  struct AttrSlices {
    std::string name;
    std::vector<double> targets;
    std::vector<int> category;  // per record
  };
  std::vector<AttrSlices> attrs;
  for (const auto& [name, targets] : marginals.counts) {
    AttrSlices a;
    a.name = name;
    a.targets = targets;
    a.category.reserve(records.size());
    for (const auto& r : records) {
      int c = micro_attr(r, name);
      if (c < 0 || c >= static_cast<int>(targets.size()))
        throw Error("fit_ipf: zone " + marginals.zone_id + ": record " +
                    std::to_string(r.record_id) + " has " + name + "=" +
                    std::to_string(c) + " outside the marginal's categories");
      a.category.push_back(c);
    }
    attrs.push_back(std::move(a));
  }
  if (attrs.empty()) throw Error("fit_ipf: zone " + marginals.zone_id + " has no marginals");

  IpfResult res;
  res.weights.assign(records.size(), 1.0);

  std::vector<double> sums;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    for (const auto& a : attrs) {
      sums.assign(a.targets.size(), 0.0);
      for (size_t i = 0; i < records.size(); ++i) sums[a.category[i]] += res.weights[i];
      for (size_t c = 0; c < a.targets.size(); ++c) {
        if (a.targets[c] > 0 && sums[c] <= 0)
          throw Error("fit_ipf: zone " + marginals.zone_id + ": marginal " + a.name +
                      " category " + std::to_string(c) +
                      " has a positive target but no supporting microdata");
      }
      for (size_t i = 0; i < records.size(); ++i) {
        size_t c = a.category[i];
        res.weights[i] = sums[c] > 0 ? res.weights[i] * (a.targets[c] / sums[c]) : 0.0;
      }
    }
    // Deviation check across all marginals.
    double dev = 0.0;
    for (const auto& a : attrs) {
      sums.assign(a.targets.size(), 0.0);
      for (size_t i = 0; i < records.size(); ++i) sums[a.category[i]] += res.weights[i];
      for (size_t c = 0; c < a.targets.size(); ++c)
        dev = std::max(dev, std::abs(sums[c] - a.targets[c]));
    }
    res.iterations = iter;
    res.max_deviation = dev;
    if (dev <= tolerance) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// Quasirandom integerization of fractional weights. Record i receives either
// floor(w_i) or floor(w_i)+1 copies, and the grand total equals round(sum w).
// Systematic thresholds u, u+1, u+2, ... are walked over the cumulative
// fractional parts; u is drawn conditionally so the number of thresholds in
// [0, F) equals the rounding target exactly.
inline std::vector<std::int64_t> integerize_quasirandom(const std::vector<double>& weights,
                                                        std::uint64_t seed,
                                                        std::int64_t expected_total = -1) {
  const size_t n = weights.size();
  std::vector<std::int64_t> counts(n, 0);
  std::vector<double> frac(n, 0.0);
  long double base_total = 0.0L, frac_total = 0.0L;
  for (size_t i = 0; i < n; ++i) {
    if (weights[i] < 0 || !std::isfinite(weights[i]))
      throw Error("integerize_quasirandom: weight " + std::to_string(i) + " is invalid");
    double b = std::floor(weights[i]);
    counts[i] = static_cast<std::int64_t>(b);
    frac[i] = weights[i] - b;
    base_total += b;
    frac_total += frac[i];
  }
  const double f_total = static_cast<double>(frac_total);
  const std::int64_t total = std::llround(static_cast<double>(base_total + frac_total));
  if (expected_total >= 0 && total != expected_total)
    throw Error("integerize_quasirandom: rounded weight total " + std::to_string(total) +
                " does not match the requested count " + std::to_string(expected_total));
  const std::int64_t extras =
      total - static_cast<std::int64_t>(std::llround(static_cast<double>(base_total)));
  if (extras <= 0) return counts;

  Rng rng(seed);
  const double f_frac = f_total - std::floor(f_total);
  double u;
  if (extras > static_cast<std::int64_t>(std::floor(f_total))) {
    // Rounding up: every threshold u+k with k < extras must fall below f_total.
    u = f_frac > 0 ? rng.next_double() * f_frac : 0.0;
  } else {
    // Rounding down: the first threshold must skip the leading fraction.
    u = f_frac + rng.next_double() * (1.0 - f_frac);
  }

  double cum = 0.0;
  std::int64_t k = 0;
  for (size_t i = 0; i < n && k < extras; ++i) {
    cum += frac[i];
    if (u + static_cast<double>(k) < cum) {
      ++counts[i];
      ++k;
    }
  }
  // Guard against accumulated float error in the walk.
  for (size_t i = n; k < extras && i > 0; --i) {
    if (frac[i - 1] > 0 && counts[i - 1] == static_cast<std::int64_t>(std::floor(weights[i - 1]))) {
      ++counts[i - 1];
      ++k;
    }
  }
  return counts;
}

// --- Projection to a target year ---------------------------------------------

// Scales the population per (age_class, sex) cell. Cells above target drop
// uniformly chosen persons; cells below duplicate: floor(t/b) copies of every
// person plus uniformly chosen extras. Cells without a target row are kept.
inline std::vector<SyntheticPerson> project_population(
    std::vector<SyntheticPerson> persons, const ProjectionTargets& targets,
    std::uint64_t seed) {
  std::map<std::pair<int, int>, std::vector<size_t>> cells;
  for (size_t i = 0; i < persons.size(); ++i)
    cells[{persons[i].age_class, persons[i].sex}].push_back(i);

  PersonId next_id = 0;
  for (const auto& p : persons) next_id = std::max(next_id, p.id + 1);

  std::vector<SyntheticPerson> out;
  out.reserve(persons.size());
  std::vector<char> keep(persons.size(), 1);
  std::vector<std::pair<size_t, int>> clones;  // source index, copies to add

  for (const auto& [cell, members] : cells) {
    auto it = targets.cells.find(cell);
    if (it == targets.cells.end()) continue;
    const std::int64_t t = it->second;
    const std::int64_t b = static_cast<std::int64_t>(members.size());
    if (t == b) continue;
    if (b == 0)
      throw Error("project_population: cell (" + std::to_string(cell.first) + "," +
                  std::to_string(cell.second) + ") has target " + std::to_string(t) +
                  " but no base persons");
    Rng rng(mix_seed(seed, "cell:" + std::to_string(cell.first) + ":" +
                               std::to_string(cell.second)));
    std::vector<size_t> order = members;
    rng.shuffle(order);
    if (t < b) {
      for (std::int64_t i = t; i < b; ++i) keep[order[i]] = 0;
    } else {
      const std::int64_t whole = t / b - 1;       // extra full copies of everyone
      const std::int64_t remainder = t - (whole + 1) * b;
      for (size_t idx : members)
        if (whole > 0) clones.emplace_back(idx, static_cast<int>(whole));
      for (std::int64_t i = 0; i < remainder; ++i) clones.emplace_back(order[i], 1);
    }
  }

  for (size_t i = 0; i < persons.size(); ++i)
    if (keep[i]) out.push_back(persons[i]);
  std::sort(clones.begin(), clones.end());
  for (const auto& [idx, copies] : clones) {
    for (int c = 0; c < copies; ++c) {
      SyntheticPerson dup = persons[idx];
      dup.id = next_id++;
      out.push_back(dup);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SyntheticPerson& a, const SyntheticPerson& b) { return a.id < b.id; });
  return out;
}

// --- Per-person attribute assignment ------------------------------------------

// Samples ages uniformly within each person's 5-year class band.
inline void sample_ages(std::vector<SyntheticPerson>& persons, std::uint64_t seed) {
  for (auto& p : persons) {
    Rng rng(mix_seed(mix_seed(seed, "age"), static_cast<std::uint64_t>(p.id)));
    p.age = rng.uniform_int(age_class_lo(p.age_class), age_class_hi(p.age_class));
  }
}

// Draws an integer-coded attribute from a conditional table keyed on
// (age_class, sex). Probabilities per key must sum to 1 within 1e-6.
inline void assign_conditional_attribute(
    std::vector<SyntheticPerson>& persons, const ConditionalTable& table,
    const std::string& label, std::uint64_t seed,
    const std::function<void(SyntheticPerson&, int)>& apply) {
  for (auto& [key, values] : table.rows) {
    double total = 0.0;
    for (const auto& [_, p] : values) total += p;
    if (std::abs(total - 1.0) > 1e-6)
      throw Error("attribute table " + label + ": probabilities for (" +
                  std::to_string(key.first) + "," + std::to_string(key.second) +
                  ") sum to " + std::to_string(total));
  }
  for (auto& p : persons) {
    auto it = table.rows.find({p.age_class, p.sex});
    if (it == table.rows.end())
      throw Error("attribute table " + label + ": no row for age_class=" +
                  std::to_string(p.age_class) + " sex=" + std::to_string(p.sex));
    Rng rng(mix_seed(mix_seed(seed, label), static_cast<std::uint64_t>(p.id)));
    double u = rng.next_double();
    double cum = 0.0;
    int value = std::stoi(it->second.back().first);
    for (const auto& [v, prob] : it->second) {
      cum += prob;
      if (u < cum) {
        value = std::stoi(v);
        break;
      }
    }
    apply(p, value);
  }
}

// --- Household assembly --------------------------------------------------------

struct HouseholdJoint {
  // maintainer (age_class, sex) -> [(member age_class, sex), probability]
  std::map<std::pair<int, int>, std::vector<std::pair<std::pair<int, int>, double>>> rows;

  static HouseholdJoint from_table(const ConditionalTable& t) {
    HouseholdJoint j;
    for (const auto& [key, values] : t.rows) {
      for (const auto& [value, p] : values) {
        auto colon = value.find(':');
        if (colon == std::string::npos)
          throw Error("household member profile value '" + value + "' is not 'age_class:sex'");
        int ac = std::stoi(value.substr(0, colon));
        int sex = std::stoi(value.substr(colon + 1));
        j.rows[key].push_back({{ac, sex}, p});
      }
    }
    return j;
  }
};

struct HouseholdAssembly {
  std::vector<Household> households;
  int fallback_draws = 0;   // drawn profile had no candidates, fell back to uniform
  int leftover_members = 0; // non-maintainers placed round-robin after filling
  int short_households = 0; // households left below their size-class target
};

// Groups one zone's persons into households. Maintainers seed households in
// person-id order; members are drawn from the joint profile distribution
// conditioned on the maintainer, with a uniform fallback when the drawn
// profile has no remaining candidates. Leftover non-maintainers go to
// open-ended households round-robin.
inline HouseholdAssembly assemble_households(std::vector<SyntheticPerson>& persons,
                                             const std::string& zone_id,
                                             const HouseholdJoint& joint,
                                             HouseholdId first_household_id,
                                             std::uint64_t seed) {
  HouseholdAssembly out;
  std::vector<size_t> maintainers;
  std::map<std::pair<int, int>, std::vector<size_t>> pool;  // profile -> person indices
  std::int64_t pool_size = 0;
  for (size_t i = 0; i < persons.size(); ++i) {
    if (persons[i].maintainer_flag) {
      maintainers.push_back(i);
    } else {
      pool[{persons[i].age_class, persons[i].sex}].push_back(i);
      ++pool_size;
    }
  }
  if (maintainers.empty() && pool_size > 0)
    throw Error("assemble_households: zone " + zone_id +
                " has members but no household maintainers");
  std::sort(maintainers.begin(), maintainers.end(),
            [&](size_t a, size_t b) { return persons[a].id < persons[b].id; });

  Rng rng(mix_seed(mix_seed(seed, "households"), zone_id));
  auto take_from = [&](std::vector<size_t>& bucket) {
    size_t pick = rng.next_below(bucket.size());
    size_t idx = bucket[pick];
    bucket[pick] = bucket.back();
    bucket.pop_back();
    --pool_size;
    return idx;
  };
  auto take_uniform = [&]() {
    std::uint64_t r = rng.next_below(static_cast<std::uint64_t>(pool_size));
    for (auto& [_, bucket] : pool) {
      if (r < bucket.size()) {
        size_t idx = bucket[r];
        bucket[r] = bucket.back();
        bucket.pop_back();
        --pool_size;
        return idx;
      }
      r -= bucket.size();
    }
    throw Error("assemble_households: uniform draw out of range");
  };

  HouseholdId next_id = first_household_id;
  for (size_t mi : maintainers) {
    Household h;
    h.id = next_id++;
    h.zone_id = zone_id;
    h.maintainer = persons[mi].id;
    h.members.push_back(persons[mi].id);
    persons[mi].household = h.id;

    const int target = household_size_from_class(persons[mi].household_size_class);
    auto jit = joint.rows.find({persons[mi].age_class, persons[mi].sex});
    while (static_cast<int>(h.members.size()) < target && pool_size > 0) {
      size_t member_idx;
      bool drawn = false;
      if (jit != joint.rows.end()) {
        double u = rng.next_double();
        double cum = 0.0;
        std::pair<int, int> profile = jit->second.back().first;
        for (const auto& [prof, p] : jit->second) {
          cum += p;
          if (u < cum) {
            profile = prof;
            break;
          }
        }
        auto bucket = pool.find(profile);
        if (bucket != pool.end() && !bucket->second.empty()) {
          member_idx = take_from(bucket->second);
          drawn = true;
        }
      }
      if (!drawn) {
        member_idx = take_uniform();
        ++out.fallback_draws;
      }
      h.members.push_back(persons[member_idx].id);
      persons[member_idx].household = h.id;
    }
    if (static_cast<int>(h.members.size()) < target) ++out.short_households;
    out.households.push_back(std::move(h));
  }

  // Leftover members join open-ended households (or any household if none).
  if (pool_size > 0 && !out.households.empty()) {
    std::vector<size_t> open;
    for (size_t i = 0; i < out.households.size(); ++i) {
      auto mit = std::find_if(persons.begin(), persons.end(), [&](const SyntheticPerson& p) {
        return p.id == out.households[i].maintainer;
      });
      if (mit->household_size_class == kOpenHouseholdSizeClass) open.push_back(i);
    }
    if (open.empty())
      for (size_t i = 0; i < out.households.size(); ++i) open.push_back(i);
    size_t slot = 0;
    while (pool_size > 0) {
      size_t idx = take_uniform();
      Household& h = out.households[open[slot % open.size()]];
      h.members.push_back(persons[idx].id);
      persons[idx].household = h.id;
      ++slot;
      ++out.leftover_members;
    }
  }
  return out;
}

// --- Residence assignment ------------------------------------------------------

struct ResidenceAssignment {
  int overflow_households = 0;  // placed after all slots in the zone were full
};

// Draws a residential facility per household with probability proportional to
// remaining capacity. Runs per zone in household-id order.
inline ResidenceAssignment assign_residences(std::vector<Household>& households,
                                             std::vector<Facility>& facilities,
                                             std::uint64_t seed) {
  ResidenceAssignment out;
  std::map<std::string, std::vector<size_t>> by_zone;
  for (size_t i = 0; i < facilities.size(); ++i)
    if (facilities[i].types.contains(FacilityType::residence) && facilities[i].residence_slots > 0)
      by_zone[facilities[i].zone_id].push_back(i);

  std::map<std::string, std::vector<Household*>> hh_by_zone;
  for (auto& h : households) hh_by_zone[h.zone_id].push_back(&h);

  for (auto& [zone, hhs] : hh_by_zone) {
    auto fit = by_zone.find(zone);
    if (fit == by_zone.end() || fit->second.empty())
      throw Error("assign_residences: zone " + zone + " has households but no residences");
    std::sort(hhs.begin(), hhs.end(),
              [](const Household* a, const Household* b) { return a->id < b->id; });
    std::vector<int> remaining;
    remaining.reserve(fit->second.size());
    std::int64_t total = 0;
    for (size_t fi : fit->second) {
      remaining.push_back(facilities[fi].residence_slots);
      total += facilities[fi].residence_slots;
    }
    Rng rng(mix_seed(mix_seed(seed, "residences"), zone));
    size_t round_robin = 0;
    for (Household* h : hhs) {
      size_t chosen;
      if (total > 0) {
        std::int64_t r = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(total)));
        chosen = 0;
        for (size_t k = 0; k < remaining.size(); ++k) {
          if (r < remaining[k]) {
            chosen = k;
            break;
          }
          r -= remaining[k];
        }
        --remaining[chosen];
        --total;
      } else {
        chosen = round_robin++ % remaining.size();
        ++out.overflow_households;
      }
      h->residence_facility = facilities[fit->second[chosen]].id;
    }
  }
  return out;
}

// --- Full pipeline -------------------------------------------------------------

struct SynthesisConfig {
  double ipf_tolerance = 1e-6;
  int ipf_max_iterations = 100;
  bool apply_projection = true;
};

struct SynthesisResult {
  std::vector<SyntheticPerson> persons;
  std::vector<Household> households;
  int fallback_draws = 0;
  int leftover_members = 0;
  int short_households = 0;
  int overflow_households = 0;
  std::map<std::string, IpfResult> ipf;  // zone -> fit diagnostics
  std::vector<std::string> warnings;
};

// Per-attribute marginal totals within a zone should agree up to rounding;
// disagreement is reported, not fatal.
inline void check_marginal_totals(const ZoneMarginals& z, std::vector<std::string>& warnings) {
  double lo = 0, hi = 0;
  bool first = true;
  for (const auto& [attr, counts] : z.counts) {
    double t = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (first) {
      lo = hi = t;
      first = false;
    } else {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  if (hi - lo > 1.0)
    warnings.push_back("zone " + z.zone_id + ": marginal totals disagree (" +
                       std::to_string(lo) + " vs " + std::to_string(hi) + ")");
}

// Runs the synthesis pipeline: per-zone IPF + integerization, projection to
// the target year, age/health/license assignment, household grouping, and
// residence placement.
inline SynthesisResult run_synthesis(const std::vector<MicroPerson>& micro,
                                     const std::vector<ZoneMarginals>& marginals,
                                     const ProjectionTargets& projections,
                                     const AttributeTables& tables,
                                     std::vector<Facility>& facilities,
                                     std::uint64_t seed,
                                     const SynthesisConfig& cfg = {},
                                     int threads = 1) {
  if (micro.empty()) throw Error("run_synthesis: empty microdata");
  SynthesisResult out;

  for (const auto& z : marginals) check_marginal_totals(z, out.warnings);

  // Per-zone fit and integerization, parallel over zones with per-zone seeds.
  std::vector<std::pair<IpfResult, std::vector<std::int64_t>>> fits(marginals.size());
  parallel_for(marginals.size(), threads, [&](size_t z) {
    IpfResult fit = fit_ipf(micro, marginals[z], cfg.ipf_tolerance, cfg.ipf_max_iterations);
    auto counts = integerize_quasirandom(
        fit.weights, mix_seed(mix_seed(seed, "integerize"), marginals[z].zone_id));
    fits[z] = {std::move(fit), std::move(counts)};
  });

  PersonId next_person = 0;
  for (size_t z = 0; z < marginals.size(); ++z) {
    out.ipf[marginals[z].zone_id] = fits[z].first;
    const auto& counts = fits[z].second;
    for (size_t i = 0; i < micro.size(); ++i) {
      for (std::int64_t c = 0; c < counts[i]; ++c) {
        SyntheticPerson p;
        p.id = next_person++;
        p.zone_id = marginals[z].zone_id;
        const MicroPerson& m = micro[i];
        p.age_class = m.age_class;
        p.sex = m.sex;
        p.labour_force_status = m.labour_force_status;
        p.income_class = m.income_class;
        p.qualification_class = m.qualification_class;
        p.household_size_class = m.household_size_class;
        p.children_present = m.children_present;
        p.household_type = m.household_type;
        p.maintainer_flag = m.maintainer_flag;
        out.persons.push_back(std::move(p));
      }
    }
  }

  if (cfg.apply_projection && !projections.cells.empty())
    out.persons = project_population(std::move(out.persons), projections,
                                     mix_seed(seed, "projection"));

  sample_ages(out.persons, seed);
  assign_conditional_attribute(out.persons, tables.require("health"), "health", seed,
                               [](SyntheticPerson& p, int v) { p.health = v; });
  assign_conditional_attribute(out.persons, tables.require("license"), "license", seed,
                               [](SyntheticPerson& p, int v) { p.has_license = v != 0; });

  HouseholdJoint joint = HouseholdJoint::from_table(tables.require("household_member"));
  std::map<std::string, std::vector<size_t>> person_by_zone;
  for (size_t i = 0; i < out.persons.size(); ++i)
    person_by_zone[out.persons[i].zone_id].push_back(i);

  HouseholdId next_household = 0;
  for (auto& [zone, indices] : person_by_zone) {
    std::vector<SyntheticPerson> zone_persons;
    zone_persons.reserve(indices.size());
    for (size_t i : indices) zone_persons.push_back(out.persons[i]);
    HouseholdAssembly hh = assemble_households(zone_persons, zone, joint, next_household, seed);
    for (size_t k = 0; k < indices.size(); ++k) out.persons[indices[k]] = zone_persons[k];
    next_household += static_cast<HouseholdId>(hh.households.size());
    out.fallback_draws += hh.fallback_draws;
    out.leftover_members += hh.leftover_members;
    out.short_households += hh.short_households;
    for (auto& h : hh.households) out.households.push_back(std::move(h));
  }

  ResidenceAssignment res = assign_residences(out.households, facilities, seed);
  out.overflow_households = res.overflow_households;
  return out;
}

}  // namespace daytrip
