#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "daytrip/common.hpp"
#include "daytrip/csv.hpp"
#include "daytrip/diaries.hpp"
#include "daytrip/parallel.hpp"
#include "daytrip/population.hpp"

namespace daytrip {

// Attribute alignment between persons and diaries. `ordinal` attributes use a
// class-shift distance |i - j|; nominal ones a 0/1 mismatch. Weights default
// to 1 with key attributes at 100.
struct CodebookEntry {
  std::string attribute;
  bool ordinal = true;
  double weight = 1.0;
};

using Codebook = std::vector<CodebookEntry>;

inline Codebook load_codebook(const std::string& path) {
  Codebook out;
  CsvReader reader(path);
  reader.for_each([&](const CsvRow& row) {
    CodebookEntry e;
    e.attribute = row.get("attribute");
    const std::string kind = row.get("kind");
    if (kind != "ordinal" && kind != "nominal")
      throw Error(path + ":" + std::to_string(row.line_number()) +
                  ": kind must be ordinal or nominal, got '" + kind + "'");
    e.ordinal = kind == "ordinal";
    e.weight = row.get_double("weight");
    if (e.weight < 0)
      throw Error(path + ":" + std::to_string(row.line_number()) + ": negative weight");
    out.push_back(std::move(e));
  });
  if (out.empty()) throw Error(path + ": empty codebook");
  return out;
}

inline int person_attr(const SyntheticPerson& p, const std::string& attr) {
  if (attr == "age_class") return p.age_class;
  if (attr == "sex") return p.sex;
  if (attr == "labour_force_status") return p.labour_force_status;
  if (attr == "income_class") return p.income_class;
  if (attr == "qualification_class") return p.qualification_class;
  if (attr == "household_size_class") return p.household_size_class;
  if (attr == "children_present") return p.children_present ? 1 : 0;
  if (attr == "health") return p.health;
  if (attr == "has_license") return p.has_license ? 1 : 0;
  throw Error("codebook attribute '" + attr + "' is not a person attribute");
}

inline int diary_attr(const DiaryRecord& d, const std::string& attr) {
  if (attr == "age_class") return d.age_class;
  if (attr == "sex") return d.sex;
  if (attr == "labour_force_status") return d.labour_force_status;
  if (attr == "income_class") return d.income_class;
  if (attr == "qualification_class") return d.qualification_class;
  if (attr == "household_size_class") return d.household_size_class;
  if (attr == "children_present") return d.children_present ? 1 : 0;
  if (attr == "health") return d.health;
  if (attr == "has_license") return d.has_license ? 1 : 0;
  throw Error("codebook attribute '" + attr + "' is not a diary attribute");
}

namespace detail {

// Shared accumulation used by both the brute-force distance and the tree, so
// the two produce bit-identical floats.
inline double feature_distance(const std::vector<int>& a, const std::vector<int>& b,
                               const Codebook& book) {
  double d = 0.0;
  for (size_t k = 0; k < book.size(); ++k) {
    if (book[k].ordinal)
      d += book[k].weight * std::abs(a[k] - b[k]);
    else if (a[k] != b[k])
      d += book[k].weight;
  }
  return d;
}

inline std::vector<int> person_features(const SyntheticPerson& p, const Codebook& book) {
  std::vector<int> f(book.size());
  for (size_t k = 0; k < book.size(); ++k) f[k] = person_attr(p, book[k].attribute);
  return f;
}

inline std::vector<int> diary_features(const DiaryRecord& d, const Codebook& book) {
  std::vector<int> f(book.size());
  for (size_t k = 0; k < book.size(); ++k) f[k] = diary_attr(d, book[k].attribute);
  return f;
}

}  // namespace detail

// Weighted class-shift distance between a person and a diary respondent.
inline double match_distance(const SyntheticPerson& p, const DiaryRecord& d,
                             const Codebook& book) {
  return detail::feature_distance(detail::person_features(p, book),
                                  detail::diary_features(d, book), book);
}

// Metric tree (vantage-point flavour) over diary feature vectors. The
// weighted distance satisfies the triangle inequality, so ball pruning with a
// strict bound keeps the search exact, including the smallest-id tie-break.
class DiaryMatcher {
 public:
  DiaryMatcher(const std::vector<DiaryRecord>& diaries, Codebook book)
      : book_(std::move(book)) {
    if (diaries.empty()) throw Error("DiaryMatcher: no diaries");
    items_.reserve(diaries.size());
    for (const auto& d : diaries)
      items_.push_back({detail::diary_features(d, book_), d.id});
    std::sort(items_.begin(), items_.end(),
              [](const Item& a, const Item& b) { return a.id < b.id; });
    std::vector<std::uint32_t> index(items_.size());
    for (std::uint32_t i = 0; i < items_.size(); ++i) index[i] = i;
    root_ = build(index.begin(), index.end());
  }

  struct Match {
    DiaryId diary = -1;
    double distance = 0.0;
  };

  Match nearest(const SyntheticPerson& p) const {
    std::vector<int> q = detail::person_features(p, book_);
    Match best;
    best.distance = std::numeric_limits<double>::infinity();
    search(root_.get(), q, best);
    return best;
  }

  const Codebook& codebook() const { return book_; }

 private:
  struct Item {
    std::vector<int> features;
    DiaryId id;
  };
  struct Node {
    std::uint32_t vantage;
    double radius = 0.0;  // median distance; inside child holds d < radius
    std::unique_ptr<Node> inside, outside;
    std::vector<std::uint32_t> bucket;  // leaf payload
  };

  static constexpr size_t kLeafSize = 8;

  using Iter = std::vector<std::uint32_t>::iterator;

  std::unique_ptr<Node> build(Iter first, Iter last) {
    if (first == last) return nullptr;
    auto node = std::make_unique<Node>();
    if (static_cast<size_t>(last - first) <= kLeafSize) {
      node->vantage = *first;
      node->bucket.assign(first, last);
      return node;
    }
    node->vantage = *first;
    ++first;
    const auto& vf = items_[node->vantage].features;
    std::vector<std::pair<double, std::uint32_t>> dist;
    dist.reserve(last - first);
    for (Iter it = first; it != last; ++it)
      dist.push_back({detail::feature_distance(vf, items_[*it].features, book_), *it});
    std::nth_element(dist.begin(), dist.begin() + dist.size() / 2, dist.end());
    node->radius = dist[dist.size() / 2].first;
    std::vector<std::uint32_t> in, out;
    for (const auto& [d, idx] : dist)
      (d < node->radius ? in : out).push_back(idx);
    node->inside = build(in.begin(), in.end());
    node->outside = build(out.begin(), out.end());
    return node;
  }

  void consider(std::uint32_t idx, const std::vector<int>& q, Match& best) const {
    double d = detail::feature_distance(q, items_[idx].features, book_);
    if (d < best.distance || (d == best.distance && items_[idx].id < best.diary)) {
      best.distance = d;
      best.diary = items_[idx].id;
    }
  }

  void search(const Node* node, const std::vector<int>& q, Match& best) const {
    if (!node) return;
    if (!node->bucket.empty()) {
      for (std::uint32_t idx : node->bucket) consider(idx, q, best);
      return;
    }
    consider(node->vantage, q, best);
    const double d = detail::feature_distance(q, items_[node->vantage].features, book_);
    if (d < node->radius) {
      search(node->inside.get(), q, best);
      if (!(node->radius - d > best.distance)) search(node->outside.get(), q, best);
    } else {
      search(node->outside.get(), q, best);
      if (!(d - node->radius > best.distance)) search(node->inside.get(), q, best);
    }
  }

  Codebook book_;
  std::vector<Item> items_;
  std::unique_ptr<Node> root_;
};

// Maps each person to the diary minimizing match_distance; ties go to the
// smallest diary id. Identical to exhaustive search by construction.
inline std::map<PersonId, DiaryId> match_population(const std::vector<SyntheticPerson>& persons,
                                                    const std::vector<DiaryRecord>& diaries,
                                                    const Codebook& book, int threads = 1) {
  if (diaries.empty()) throw Error("match_population: no diaries");
  DiaryMatcher matcher(diaries, book);
  std::vector<DiaryId> matched(persons.size());
  parallel_for(persons.size(), threads,
               [&](size_t i) { matched[i] = matcher.nearest(persons[i]).diary; });
  std::map<PersonId, DiaryId> out;
  for (size_t i = 0; i < persons.size(); ++i) out[persons[i].id] = matched[i];
  return out;
}

}  // namespace daytrip
