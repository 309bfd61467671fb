// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/kg.hpp"
#include "kgsheaf/relation.hpp"

#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <unordered_set>
#include <vector>

namespace kgsheaf {

struct RankRecord {
  Index query = 0;
  Index entity = 0;
  double rank = 1.0;  // filtered, mean over ties
  Index pool = 1;     // candidates left after filtering, including the true one
};

/// Filtered rank of `true_id` among ascending energies. Filtered ids are
/// removed from the pool; a tie group of size g starting after `less`
/// better candidates gets rank less + (g + 1) / 2.
inline RankRecord rank_tail(const Vector& scores, Index true_id, const std::unordered_set<Index>& filter,
                            Index query_id = 0) {
  const Index n = scores.size();
  if (true_id < 0 || true_id >= n) throw IndexError("true entity id out of range");
  if (filter.count(true_id)) throw ContractError("the true entity is in the filter set");
  const double s = scores(true_id);
  if (!std::isfinite(s)) throw NumericError("non-finite score for the true entity");
  Index less = 0, equal = 0, pool = 0;
  for (Index j = 0; j < n; ++j) {
    if (j != true_id && filter.count(j)) continue;
    ++pool;
    if (j == true_id) continue;
    if (scores(j) < s)
      ++less;
    else if (scores(j) == s)
      ++equal;
  }
  return {query_id, true_id, 1.0 + static_cast<double>(less) + 0.5 * static_cast<double>(equal), pool};
}

struct Metrics {
  std::map<int, double> hits;
  double mrr = 0.0;
  Index count = 0;
};

inline Metrics metrics(const std::vector<RankRecord>& records, const std::vector<int>& ks) {
  if (records.empty()) throw ContractError("metrics are undefined on an empty record set");
  Metrics m;
  m.count = static_cast<Index>(records.size());
  double rr = 0.0;
  for (const auto& r : records) rr += 1.0 / r.rank;
  m.mrr = rr / static_cast<double>(m.count);
  for (int k : ks) {
    Index hit = 0;
    for (const auto& r : records)
      if (r.rank <= k) ++hit;
    m.hits[k] = static_cast<double>(hit) / static_cast<double>(m.count);
  }
  return m;
}

inline nlohmann::json to_json(const Metrics& m) {
  nlohmann::json j;
  for (const auto& [k, v] : m.hits) j["hits@" + std::to_string(k)] = v;
  j["mrr"] = m.mrr;
  j["count"] = m.count;
  return j;
}

struct KgcOptions {
  std::vector<int> ks{1, 3, 10};
  int score_exponent = 2;
  bool head_side = false;
};

struct KgcResult {
  std::vector<RankRecord> tail_records;
  std::vector<RankRecord> head_records;
  Metrics metrics;  // over tail records, plus head records when enabled
};

/// Filtered link prediction over every entity of `x`. For (h, r, t) the
/// filter is every other known tail of (h, r) in `known`.
inline KgcResult evaluate_kgc(const RelationSet& reps, const Table& x, const std::vector<Triple>& est,
                              const std::vector<Triple>& known, const KgcOptions& opt = {}) {
  const Index n = x.rows();
  for (const auto& t : est) {
    if (t.head < 0 || t.head >= n || t.tail < 0 || t.tail >= n)
      throw CoverageError("estimation triple references an entity without an embedding row");
    if (t.relation < 0 || t.relation >= static_cast<Index>(reps.size()))
      throw SchemaError("estimation triple references an unknown relation");
  }
  if (!x.allFinite()) throw NumericError("entity table has non-finite entries");

  TailIndex tails, heads;
  tails.add_all(known);
  tails.add_all(est);
  for (const auto& t : known) heads.add(Triple{t.tail, t.relation, t.head});
  for (const auto& t : est) heads.add(Triple{t.tail, t.relation, t.head});

  // Projections R x_j of every entity, per relation and side.
  std::map<Index, Table> tail_proj, head_proj;
  for (const auto& t : est) {
    const auto& rr = reps[static_cast<std::size_t>(t.relation)];
    if (!tail_proj.count(t.relation)) tail_proj.emplace(t.relation, Table(x * rr.tail.transpose()));
    if (opt.head_side && !head_proj.count(t.relation)) head_proj.emplace(t.relation, Table(x * rr.head.transpose()));
  }

  auto energy = [&](double sq) { return opt.score_exponent == 1 ? std::sqrt(sq) : sq; };
  KgcResult out;
  out.tail_records.resize(est.size());
  if (opt.head_side) out.head_records.resize(est.size());
  parallel_for(static_cast<Index>(est.size()), [&](Index lo, Index hi) {
    for (Index q = lo; q < hi; ++q) {
      const auto& t = est[static_cast<std::size_t>(q)];
      const auto& rr = reps[static_cast<std::size_t>(t.relation)];
      {
        const Eigen::RowVectorXd a = (rr.head * x.row(t.head).transpose() + rr.translation).transpose();
        const Table& proj = tail_proj.at(t.relation);
        Vector scores(n);
        for (Index j = 0; j < n; ++j) scores(j) = energy((a - proj.row(j)).squaredNorm());
        std::unordered_set<Index> filter = tails.tails(t.head, t.relation);
        filter.erase(t.tail);
        out.tail_records[static_cast<std::size_t>(q)] = rank_tail(scores, t.tail, filter, q);
      }
      if (opt.head_side) {
        const Eigen::RowVectorXd c = (rr.tail * x.row(t.tail).transpose() - rr.translation).transpose();
        const Table& proj = head_proj.at(t.relation);
        Vector scores(n);
        for (Index j = 0; j < n; ++j) scores(j) = energy((proj.row(j) - c).squaredNorm());
        std::unordered_set<Index> filter = heads.tails(t.tail, t.relation);
        filter.erase(t.head);
        out.head_records[static_cast<std::size_t>(q)] = rank_tail(scores, t.head, filter, q);
      }
    }
  }, 16);
  std::vector<RankRecord> all = out.tail_records;
  all.insert(all.end(), out.head_records.begin(), out.head_records.end());
  out.metrics = metrics(all, opt.ks);
  return out;
}

}  // namespace kgsheaf
