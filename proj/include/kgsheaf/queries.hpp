// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/eval.hpp"
#include "kgsheaf/kg.hpp"
#include "kgsheaf/linalg.hpp"
#include "kgsheaf/sheaf.hpp"

#include <algorithm>
#include <array>
#include <nlohmann/json.hpp>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kgsheaf {

enum class QueryShape { p1, p2, p3, i2, i3, pi, ip };

inline constexpr std::array<QueryShape, 7> kAllShapes{QueryShape::p1, QueryShape::p2, QueryShape::p3, QueryShape::i2,
                                                      QueryShape::i3, QueryShape::pi, QueryShape::ip};

inline std::string to_string(QueryShape s) {
  switch (s) {
    case QueryShape::p1: return "1p";
    case QueryShape::p2: return "2p";
    case QueryShape::p3: return "3p";
    case QueryShape::i2: return "2i";
    case QueryShape::i3: return "3i";
    case QueryShape::pi: return "pi";
    case QueryShape::ip: return "ip";
  }
  return "?";
}

inline QueryShape parse_query_shape(std::string_view s) {
  for (auto shape : kAllShapes)
    if (to_string(shape) == s) return shape;
  throw ShapeError("unknown query shape '" + std::string(s) + "'");
}

struct ShapeArity {
  Index anchors;
  Index relations;
  Index interior;
};

inline ShapeArity arity(QueryShape s) {
  switch (s) {
    case QueryShape::p1: return {1, 1, 0};
    case QueryShape::p2: return {1, 2, 1};
    case QueryShape::p3: return {1, 3, 2};
    case QueryShape::i2: return {2, 2, 0};
    case QueryShape::i3: return {3, 3, 0};
    case QueryShape::pi: return {2, 3, 1};
    case QueryShape::ip: return {2, 3, 1};
  }
  return {0, 0, 0};
}

/// Query subgraph over local node ids: anchors first, then interior
/// variables, then the target. Edge triples use local ids.
///
/// Relation order per shape:
///   1p  s -r1-> t
///   2p  s -r1-> u1 -r2-> t
///   3p  s -r1-> u1 -r2-> u2 -r3-> t
///   2i  s1 -r1-> t,  s2 -r2-> t
///   3i  s1 -r1-> t,  s2 -r2-> t,  s3 -r3-> t
///   pi  s1 -r1-> u1 -r2-> t,  s2 -r3-> t
///   ip  s1 -r1-> u1,  s2 -r2-> u1,  u1 -r3-> t
struct QueryGraph {
  QueryShape shape = QueryShape::p1;
  std::vector<Index> anchors;    // entity ids
  std::vector<Index> relations;  // relation ids, shape order
  Index num_interior = 0;
  std::vector<Triple> edges;

  Index num_nodes() const { return static_cast<Index>(anchors.size()) + num_interior + 1; }
  Index target() const { return num_nodes() - 1; }
  std::vector<Index> interior_nodes() const {
    std::vector<Index> u;
    for (Index k = 0; k < num_interior; ++k) u.push_back(static_cast<Index>(anchors.size()) + k);
    return u;
  }
  /// Anchors followed by the target.
  std::vector<Index> boundary_nodes() const {
    std::vector<Index> b;
    for (Index k = 0; k < static_cast<Index>(anchors.size()); ++k) b.push_back(k);
    b.push_back(target());
    return b;
  }
};

struct QueryInstance {
  QueryGraph graph;
  std::vector<Index> easy_answers;
  std::vector<Index> hard_answers;
};

inline QueryGraph build_query(QueryShape shape, std::vector<Index> anchors, std::vector<Index> relations) {
  const auto ar = arity(shape);
  if (static_cast<Index>(anchors.size()) != ar.anchors || static_cast<Index>(relations.size()) != ar.relations)
    throw ShapeError("query shape " + to_string(shape) + " takes " + std::to_string(ar.anchors) + " anchors and " +
                     std::to_string(ar.relations) + " relations, got " + std::to_string(anchors.size()) + " and " +
                     std::to_string(relations.size()));
  QueryGraph q;
  q.shape = shape;
  q.anchors = std::move(anchors);
  q.relations = std::move(relations);
  q.num_interior = ar.interior;
  const Index a = ar.anchors;
  const Index t = q.target();
  const auto& r = q.relations;
  switch (shape) {
    case QueryShape::p1: q.edges = {{0, r[0], t}}; break;
    case QueryShape::p2: q.edges = {{0, r[0], a}, {a, r[1], t}}; break;
    case QueryShape::p3: q.edges = {{0, r[0], a}, {a, r[1], a + 1}, {a + 1, r[2], t}}; break;
    case QueryShape::i2: q.edges = {{0, r[0], t}, {1, r[1], t}}; break;
    case QueryShape::i3: q.edges = {{0, r[0], t}, {1, r[1], t}, {2, r[2], t}}; break;
    case QueryShape::pi: q.edges = {{0, r[0], a}, {a, r[1], t}, {1, r[2], t}}; break;
    case QueryShape::ip: q.edges = {{0, r[0], a}, {1, r[1], a}, {a, r[2], t}}; break;
  }
  return q;
}

/// Schur complement M[B,B] - M[B,U] M[U,U]^+ M[U,B] with B the complement
/// of `interior` in ascending order.
inline Matrix schur_reduce(const BlockSparseSymmetric& m, const std::vector<Index>& interior,
                           double cutoff = kDefaultPinvCutoff) {
  std::vector<char> in_u(static_cast<std::size_t>(m.nodes()), 0);
  for (Index u : interior) {
    if (u < 0 || u >= m.nodes()) throw IndexError("interior node out of range");
    in_u[static_cast<std::size_t>(u)] = 1;
  }
  std::vector<Index> boundary;
  for (Index i = 0; i < m.nodes(); ++i)
    if (!in_u[static_cast<std::size_t>(i)]) boundary.push_back(i);
  Matrix bb = submatrix(m, boundary, boundary).to_dense();
  if (interior.empty()) return bb;
  const Matrix uu = submatrix(m, interior, interior).to_dense();
  const Matrix ub = submatrix(m, interior, boundary).to_dense();
  bb -= ub.transpose() * PsdSolver(uu, cutoff).solve(ub);
  return 0.5 * (bb + bb.transpose());
}

/// Query energy as a function of the boundary values x_B = (x_S, x_t) in
/// raw coordinates, after eliminating the interior variables:
///   E(x_B) = x_B^T M x_B - linear^T x_B + constant.
/// In the normalized frame the rescaling D^{1/2} is folded into M and linear.
struct ReducedQuery {
  Index dim = 0;
  Index num_anchors = 0;
  Matrix quadratic;
  Vector linear;
  double constant = 0.0;
};

inline ReducedQuery reduce_query(const QueryGraph& q, const RelationSet& reps, Frame frame = Frame::normalized,
                                 double cutoff = kDefaultPinvCutoff) {
  Coboundary delta(q.num_nodes(), q.edges, reps);
  const SheafSystem s = build_sheaf_system(delta, cutoff);
  const Index d = s.dim();
  const auto U = q.interior_nodes();
  const auto B = q.boundary_nodes();
  const auto& op = s.op(frame);

  ReducedQuery out;
  out.dim = d;
  out.num_anchors = static_cast<Index>(q.anchors.size());

  Matrix dense_delta = delta.to_dense();
  if (frame == Frame::normalized) {
    Matrix sc = Matrix::Zero(s.nodes() * d, s.nodes() * d);
    for (Index i = 0; i < s.nodes(); ++i) sc.block(i * d, i * d, d, d) = s.scale[static_cast<std::size_t>(i)];
    dense_delta = dense_delta * sc;
  }
  auto columns = [&](const std::vector<Index>& ids) {
    Matrix c(dense_delta.rows(), static_cast<Index>(ids.size()) * d);
    for (std::size_t k = 0; k < ids.size(); ++k) c.middleCols(static_cast<Index>(k) * d, d) = dense_delta.middleCols(ids[k] * d, d);
    return c;
  };
  const Matrix delta_b = columns(B);
  const Vector r = delta.translations();

  Matrix m_y = schur_reduce(op, U, cutoff);
  Vector lin_y;
  if (U.empty()) {
    lin_y = 2.0 * delta_b.transpose() * r;
    out.constant = r.squaredNorm();
  } else {
    const Matrix delta_u = columns(U);
    const PsdSolver uu(submatrix(op, U, U).to_dense(), cutoff);
    const Matrix k = uu.solve(Matrix(submatrix(op, U, B).to_dense()));
    lin_y = 2.0 * (delta_b - delta_u * k).transpose() * r;
    const Vector du_r = delta_u.transpose() * r;
    out.constant = r.squaredNorm() - du_r.dot(uu.solve(du_r));
  }

  if (frame == Frame::normalized) {
    Matrix t = Matrix::Zero(static_cast<Index>(B.size()) * d, static_cast<Index>(B.size()) * d);
    for (std::size_t k = 0; k < B.size(); ++k)
      t.block(static_cast<Index>(k) * d, static_cast<Index>(k) * d, d, d) = s.sqrt_degree[static_cast<std::size_t>(B[k])];
    out.quadratic = t * m_y * t;
    out.linear = t * lin_y;
  } else {
    out.quadratic = m_y;
    out.linear = lin_y;
  }
  out.quadratic = 0.5 * (out.quadratic + out.quadratic.transpose());
  return out;
}

/// Full reduced energy at explicit boundary values (anchors then target).
inline double query_energy(const ReducedQuery& rq, const Vector& x_boundary) {
  return x_boundary.dot(rq.quadratic * x_boundary) - rq.linear.dot(x_boundary) + rq.constant;
}

namespace detail {

struct CandidateTerms {
  double anchor_quadratic;  // x_S^T M_SS x_S
  Vector cross;             // 2 M_tS x_S
  Matrix target_block;      // M_tt
};

inline CandidateTerms candidate_terms(const ReducedQuery& rq, const Table& x_anchors) {
  const Index d = rq.dim;
  const Index sa = rq.num_anchors * d;
  if (x_anchors.rows() != rq.num_anchors || x_anchors.cols() != d)
    throw DimensionError("anchor table must have one row of width d per anchor");
  const Vector xs = flatten(x_anchors);
  return {xs.dot(rq.quadratic.topLeftCorner(sa, sa) * xs), 2.0 * rq.quadratic.block(sa, 0, d, sa) * xs,
          rq.quadratic.block(sa, sa, d, d)};
}

}  // namespace detail

/// x_B^T M x_B for every candidate row placed in the target slot.
/// Ascending order ranks the answers.
inline Vector score_candidates_quadratic(const ReducedQuery& rq, const Table& x_anchors, const Table& candidates) {
  const auto terms = detail::candidate_terms(rq, x_anchors);
  if (candidates.cols() != rq.dim) throw DimensionError("candidate table width differs from the stalk dimension");
  Vector out(candidates.rows());
  parallel_for(candidates.rows(), [&](Index lo, Index hi) {
    for (Index j = lo; j < hi; ++j) {
      const Vector xt = candidates.row(j).transpose();
      out(j) = terms.anchor_quadratic + terms.cross.dot(xt) + xt.dot(terms.target_block * xt);
    }
  });
  return out;
}

/// Reduced energy with translational terms. Terms that do not depend on
/// the target (anchor-only and the r^T r part) are dropped unless
/// `include_constant` is set; they do not change the ranking.
inline Vector score_candidates_translational(const ReducedQuery& rq, const Table& x_anchors, const Table& candidates,
                                             bool include_constant = false) {
  const auto terms = detail::candidate_terms(rq, x_anchors);
  const Index d = rq.dim;
  const Index sa = rq.num_anchors * d;
  if (candidates.cols() != d) throw DimensionError("candidate table width differs from the stalk dimension");
  const Vector lin_t = rq.linear.segment(sa, d);
  const double offset = include_constant
                            ? terms.anchor_quadratic - rq.linear.head(sa).dot(flatten(x_anchors)) + rq.constant
                            : 0.0;
  Vector out(candidates.rows());
  parallel_for(candidates.rows(), [&](Index lo, Index hi) {
    for (Index j = lo; j < hi; ++j) {
      const Vector xt = candidates.row(j).transpose();
      out(j) = offset + terms.cross.dot(xt) + xt.dot(terms.target_block * xt) - lin_t.dot(xt);
    }
  });
  return out;
}

inline Table anchor_rows(const QueryGraph& q, const Table& entities) {
  Table xs(static_cast<Index>(q.anchors.size()), entities.cols());
  for (std::size_t k = 0; k < q.anchors.size(); ++k) {
    const Index a = q.anchors[k];
    if (a < 0 || a >= entities.rows()) throw IndexError("unknown anchor entity id " + std::to_string(a));
    xs.row(static_cast<Index>(k)) = entities.row(a);
  }
  return xs;
}

/// Scores every entity as the target of `q`.
inline Vector score_query(const QueryGraph& q, const RelationSet& reps, const Table& entities,
                          Frame frame = Frame::normalized) {
  for (Index r : q.relations)
    if (r < 0 || r >= static_cast<Index>(reps.size())) throw IndexError("unknown relation id " + std::to_string(r));
  const Table xs = anchor_rows(q, entities);
  const ReducedQuery rq = reduce_query(q, reps, frame);
  return has_translations(reps) ? score_candidates_translational(rq, xs, entities)
                                : score_candidates_quadratic(rq, xs, entities);
}

/// Filtered ranks of the hard answers. Every other answer (easy or hard) is
/// removed from the candidate pool before ranking a hard answer.
inline std::vector<RankRecord> answer_query(const QueryInstance& inst, const RelationSet& reps, const Table& entities,
                                            Index query_index = 0, Frame frame = Frame::normalized) {
  const Vector scores = score_query(inst.graph, reps, entities, frame);
  std::unordered_set<Index> answers(inst.easy_answers.begin(), inst.easy_answers.end());
  for (Index h : inst.hard_answers) {
    if (answers.count(h) && std::find(inst.easy_answers.begin(), inst.easy_answers.end(), h) != inst.easy_answers.end())
      throw ContractError("an answer is both easy and hard");
    answers.insert(h);
  }
  std::vector<RankRecord> out;
  for (Index h : inst.hard_answers) {
    if (h < 0 || h >= entities.rows()) throw IndexError("unknown answer entity id " + std::to_string(h));
    std::unordered_set<Index> filter = answers;
    filter.erase(h);
    out.push_back(rank_tail(scores, h, filter, query_index));
  }
  return out;
}

// ---- JSON Lines ------------------------------------------------------------

inline QueryInstance parse_query_instance(const nlohmann::json& j) {
  try {
    QueryInstance inst;
    inst.graph = build_query(parse_query_shape(j.at("shape").get<std::string>()), j.at("anchors").get<std::vector<Index>>(),
                             j.at("relations").get<std::vector<Index>>());
    if (j.contains("easy_answers")) inst.easy_answers = j.at("easy_answers").get<std::vector<Index>>();
    inst.hard_answers = j.at("hard_answers").get<std::vector<Index>>();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("query record: ") + e.what());
  }
}

inline nlohmann::json to_json(const QueryInstance& q) {
  return {{"shape", to_string(q.graph.shape)},
          {"anchors", q.graph.anchors},
          {"relations", q.graph.relations},
          {"easy_answers", q.easy_answers},
          {"hard_answers", q.hard_answers}};
}

inline std::vector<QueryInstance> read_queries(std::istream& in) {
  std::vector<QueryInstance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("query line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(parse_query_instance(j));
  }
  return out;
}

inline void write_queries(std::ostream& out, const std::vector<QueryInstance>& qs) {
  for (const auto& q : qs) out << to_json(q).dump() << '\n';
}

// ---- Answer sets and query sampling ---------------------------------------

/// (head, relation) -> tails adjacency for symbolic query evaluation.
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(const std::vector<Triple>& ts) {
    for (const auto& t : ts) add(t);
  }
  void add(const Triple& t) {
    out_[t.head].push_back(t);
    in_[t.tail].push_back(t);
    idx_.add(t);
  }
  std::set<Index> project(const std::set<Index>& from, Index r) const {
    std::set<Index> out;
    for (Index h : from)
      for (Index t : idx_.tails(h, r)) out.insert(t);
    return out;
  }
  const std::vector<Triple>& out_edges(Index h) const { return lookup(out_, h); }
  const std::vector<Triple>& in_edges(Index t) const { return lookup(in_, t); }

 private:
  static const std::vector<Triple>& lookup(const std::unordered_map<Index, std::vector<Triple>>& m, Index k) {
    static const std::vector<Triple> empty;
    auto it = m.find(k);
    return it == m.end() ? empty : it->second;
  }
  std::unordered_map<Index, std::vector<Triple>> out_, in_;
  TailIndex idx_;
};

inline std::set<Index> intersect(const std::set<Index>& a, const std::set<Index>& b) {
  std::set<Index> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.begin()));
  return out;
}

/// Entities satisfying the query with existentially quantified interiors.
inline std::set<Index> query_answers(const QueryGraph& q, const Adjacency& g) {
  const auto& a = q.anchors;
  const auto& r = q.relations;
  auto one = [](Index e) { return std::set<Index>{e}; };
  switch (q.shape) {
    case QueryShape::p1: return g.project(one(a[0]), r[0]);
    case QueryShape::p2: return g.project(g.project(one(a[0]), r[0]), r[1]);
    case QueryShape::p3: return g.project(g.project(g.project(one(a[0]), r[0]), r[1]), r[2]);
    case QueryShape::i2: return intersect(g.project(one(a[0]), r[0]), g.project(one(a[1]), r[1]));
    case QueryShape::i3:
      return intersect(intersect(g.project(one(a[0]), r[0]), g.project(one(a[1]), r[1])), g.project(one(a[2]), r[2]));
    case QueryShape::pi: return intersect(g.project(g.project(one(a[0]), r[0]), r[1]), g.project(one(a[1]), r[2]));
    case QueryShape::ip:
      return g.project(intersect(g.project(one(a[0]), r[0]), g.project(one(a[1]), r[1])), r[2]);
  }
  return {};
}

/// Samples queries grounded in `full`; easy answers are those reachable in
/// `observed`, hard answers the rest. Queries without hard answers are
/// skipped.
inline std::vector<QueryInstance> sample_queries(QueryShape shape, const std::vector<Triple>& observed,
                                                 const std::vector<Triple>& full, Index count, std::uint64_t seed,
                                                 Index max_attempts = 0) {
  const Adjacency obs(observed), all(full);
  std::mt19937_64 rng(seed);
  if (full.empty()) return {};
  if (max_attempts <= 0) max_attempts = 200 * count + 1000;
  auto pick = [&](const std::vector<Triple>& v) -> const Triple* {
    if (v.empty()) return nullptr;
    std::uniform_int_distribution<std::size_t> u(0, v.size() - 1);
    return &v[u(rng)];
  };
  auto other_in_edge = [&](Index node, const Triple& not_this) -> std::optional<Triple> {
    std::vector<Triple> cands;
    for (const auto& t : all.in_edges(node))
      if (!(t == not_this)) cands.push_back(t);
    if (cands.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> u(0, cands.size() - 1);
    return cands[u(rng)];
  };

  std::vector<QueryInstance> out;
  std::set<std::pair<std::vector<Index>, std::vector<Index>>> seen;
  for (Index attempt = 0; attempt < max_attempts && static_cast<Index>(out.size()) < count; ++attempt) {
    const Triple* e1 = pick(full);
    std::vector<Index> anchors, rels;
    bool ok = true;
    switch (shape) {
      case QueryShape::p1: anchors = {e1->head}; rels = {e1->relation}; break;
      case QueryShape::p2:
      case QueryShape::p3: {
        anchors = {e1->head};
        rels = {e1->relation};
        Index cur = e1->tail;
        const int hops = shape == QueryShape::p2 ? 1 : 2;
        for (int h = 0; h < hops && ok; ++h) {
          const Triple* e = pick(all.out_edges(cur));
          if (!e) ok = false;
          else {
            rels.push_back(e->relation);
            cur = e->tail;
          }
        }
        break;
      }
      case QueryShape::i2:
      case QueryShape::i3: {
        anchors = {e1->head};
        rels = {e1->relation};
        const Index t = e1->tail;
        const auto& ins = all.in_edges(t);
        const std::size_t need = shape == QueryShape::i2 ? 2 : 3;
        if (ins.size() < need) { ok = false; break; }
        std::vector<Triple> pool;
        for (const auto& e : ins)
          if (!(e == *e1)) pool.push_back(e);
        std::shuffle(pool.begin(), pool.end(), rng);
        for (std::size_t k = 0; k + 1 < need; ++k) {
          anchors.push_back(pool[k].head);
          rels.push_back(pool[k].relation);
        }
        break;
      }
      case QueryShape::pi: {
        const Triple* e2 = pick(all.out_edges(e1->tail));
        if (!e2) { ok = false; break; }
        const auto e3 = other_in_edge(e2->tail, *e2);
        if (!e3) { ok = false; break; }
        anchors = {e1->head, e3->head};
        rels = {e1->relation, e2->relation, e3->relation};
        break;
      }
      case QueryShape::ip: {
        const auto e2 = other_in_edge(e1->tail, *e1);
        if (!e2) { ok = false; break; }
        const Triple* e3 = pick(all.out_edges(e1->tail));
        if (!e3) { ok = false; break; }
        anchors = {e1->head, e2->head};
        rels = {e1->relation, e2->relation, e3->relation};
        break;
      }
    }
    if (!ok) continue;
    if (!seen.insert({anchors, rels}).second) continue;
    QueryInstance inst;
    inst.graph = build_query(shape, anchors, rels);
    const auto every = query_answers(inst.graph, all);
    const auto easy = query_answers(inst.graph, obs);
    for (Index e : every) (easy.count(e) ? inst.easy_answers : inst.hard_answers).push_back(e);
    if (inst.hard_answers.empty()) continue;
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace kgsheaf
