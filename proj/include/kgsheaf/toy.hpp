// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/kg.hpp"
#include "kgsheaf/model.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <algorithm>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace kgsheaf {

struct ToyOptions {
  Index num_entities = 100;
  Index num_relations = 5;
  ModelFamily family = ModelFamily::TransE;
  Index dim = 8;
  double noise = 0.05;
  std::uint64_t seed = 0;
  /// Entities per latent class.
  Index class_size = 4;
  /// Probability that an entity pair along a class edge is emitted.
  double keep_probability = 0.6;
  /// Emission threshold as a multiple of the expected noise energy.
  double threshold_factor = 3.0;
};

struct ToyGraph {
  KnowledgeGraph graph;
  ModelParams planted;
  std::vector<Index> entity_class;
};

namespace detail {

inline Matrix random_orthogonal(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(d, d);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = n(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  return q;
}

inline Matrix near_identity(Index d, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, scale / std::sqrt(static_cast<double>(d)));
  Matrix m = Matrix::Identity(d, d);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] += n(rng);
  return m;
}

/// Zero-energy image of `z` under relation `r`.
inline Vector transport(const ModelParams& p, Index r, const Vector& z) {
  switch (p.family) {
    case ModelFamily::TransE: return z + p.translations.row(r).transpose();
    case ModelFamily::TransR:
      return z + Matrix(p.head_map(r)).partialPivLu().solve(Vector(p.translations.row(r).transpose()));
    case ModelFamily::RotatE: return rotation_blocks(p.phases.row(r)) * z;
    case ModelFamily::SE: return Matrix(p.tail_map(r)).partialPivLu().solve(Vector(p.head_map(r) * z));
  }
  return z;
}

inline double noise_energy(const ModelParams& p, Index r) {
  switch (p.family) {
    case ModelFamily::TransE:
    case ModelFamily::RotatE: return 2.0 * static_cast<double>(p.dim);
    case ModelFamily::TransR: return 2.0 * Matrix(p.head_map(r)).squaredNorm();
    case ModelFamily::SE: return Matrix(p.head_map(r)).squaredNorm() + Matrix(p.tail_map(r)).squaredNorm();
  }
  return 0.0;
}

}  // namespace detail

/// Synthetic graph with planted parameters. Entities fall into latent
/// classes arranged as a random forest; each class edge (parent, r, child)
/// carries the child centroid to the zero-energy image of the parent
/// centroid. Entity embeddings are centroids plus Gaussian noise, and a
/// pair along a class edge is emitted when its planted energy stays below
/// `threshold_factor * noise^2 * E|noise residual|^2` (at least 1e-18).
inline ToyGraph generate_toy_kg(const ToyOptions& o) {
  if (o.num_entities < 2) throw ContractError("toy graph needs at least 2 entities");
  if (o.dim < 1) throw DimensionError("embedding dimension must be >= 1");
  if (o.num_relations < 1) throw ContractError("toy graph needs at least 1 relation");
  if (o.family == ModelFamily::RotatE && o.dim % 2 != 0)
    throw DimensionError("RotatE requires an even embedding dimension");
  if (o.class_size < 1 || o.noise < 0.0) throw ContractError("invalid toy graph options");

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const Index d = o.dim;
  const Index nr = o.num_relations;

  ModelParams p;
  p.family = o.family;
  p.dim = d;
  auto stack = [&](Table& maps, auto make) {
    maps.resize(nr * d, d);
    for (Index r = 0; r < nr; ++r) maps.middleRows(r * d, d) = make();
  };
  auto gaussian = [&](Table& t, Index rows, Index cols) {
    t.resize(rows, cols);
    for (Index i = 0; i < t.size(); ++i) t.data()[i] = unit(rng);
  };
  switch (o.family) {
    case ModelFamily::SE:
      stack(p.head_maps, [&] { return detail::random_orthogonal(d, rng); });
      stack(p.tail_maps, [&] { return detail::near_identity(d, 0.3, rng); });
      break;
    case ModelFamily::TransE: gaussian(p.translations, nr, d); break;
    case ModelFamily::TransR:
      stack(p.head_maps, [&] { return detail::near_identity(d, 0.3, rng); });
      gaussian(p.translations, nr, d);
      break;
    case ModelFamily::RotatE: {
      std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
      p.phases.resize(nr, d / 2);
      for (Index i = 0; i < p.phases.size(); ++i) p.phases.data()[i] = angle(rng);
      break;
    }
  }

  const Index num_classes = (o.num_entities + o.class_size - 1) / o.class_size;
  std::vector<Vector> centroid(static_cast<std::size_t>(num_classes));
  struct ClassEdge {
    Index parent, relation, child;
  };
  std::vector<ClassEdge> class_edges;
  std::set<std::pair<Index, Index>> used;
  {
    Vector root(d);
    for (Index k = 0; k < d; ++k) root(k) = unit(rng);
    centroid[0] = root;
  }
  for (Index c = 1; c < num_classes; ++c) {
    std::uniform_int_distribution<Index> parent_dist(0, c - 1), rel_dist(0, nr - 1);
    Index parent = parent_dist(rng), rel = rel_dist(rng);
    for (int tries = 0; tries < 64 && used.count({parent, rel}); ++tries) {
      parent = parent_dist(rng);
      rel = rel_dist(rng);
    }
    used.insert({parent, rel});
    centroid[static_cast<std::size_t>(c)] = detail::transport(p, rel, centroid[static_cast<std::size_t>(parent)]);
    class_edges.push_back({parent, rel, c});
  }

  ToyGraph out;
  out.entity_class.resize(static_cast<std::size_t>(o.num_entities));
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(num_classes));
  p.entities.resize(o.num_entities, d);
  for (Index e = 0; e < o.num_entities; ++e) {
    const Index c = e % num_classes;
    out.entity_class[static_cast<std::size_t>(e)] = c;
    members[static_cast<std::size_t>(c)].push_back(e);
    Vector x = centroid[static_cast<std::size_t>(c)];
    if (o.noise > 0.0)
      for (Index k = 0; k < d; ++k) x(k) += o.noise * unit(rng);
    p.entities.row(e) = x.transpose();
  }

  Vocabulary ents, rels;
  for (Index e = 0; e < o.num_entities; ++e) ents.add("e" + std::to_string(e));
  for (Index r = 0; r < nr; ++r) rels.add("r" + std::to_string(r));
  out.graph = KnowledgeGraph(std::move(ents), std::move(rels));
  for (const auto& ce : class_edges) {
    // The floor admits planted pairs whose energy is 0 up to rounding.
    const double threshold =
        std::max(o.threshold_factor * o.noise * o.noise * detail::noise_energy(p, ce.relation), 1e-18);
    for (Index h : members[static_cast<std::size_t>(ce.parent)])
      for (Index t : members[static_cast<std::size_t>(ce.child)]) {
        if (coin(rng) >= o.keep_probability) continue;
        if (score_triple(p, h, ce.relation, t) <= threshold) out.graph.add(Triple{h, ce.relation, t});
      }
  }
  out.planted = std::move(p);
  return out;
}

struct HoldoutOptions {
  Index num_holdout = 20;
  /// Probability that a triple touching a held-out entity is observed.
  double observed_fraction = 0.5;
  std::uint64_t seed = 0;
};

/// Semi-inductive split of `g`: held-out entities are removed from the
/// training graph; triples touching them are divided between the observed
/// inference graph and the estimation set. Every endpoint of an estimation
/// triple also occurs in a training or observed triple. The training
/// vocabulary holds every relation and the entities of training triples.
inline SplitBundle holdout_split(const KnowledgeGraph& g, const HoldoutOptions& o) {
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Index> degree(static_cast<std::size_t>(g.num_entities()), 0);
  for (const auto& t : g.triples()) {
    ++degree[static_cast<std::size_t>(t.head)];
    ++degree[static_cast<std::size_t>(t.tail)];
  }
  std::vector<Index> candidates;
  for (Index e = 0; e < g.num_entities(); ++e)
    if (degree[static_cast<std::size_t>(e)] > 0) candidates.push_back(e);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  if (o.num_holdout < 0 || o.num_holdout >= static_cast<Index>(candidates.size()))
    throw ContractError("hold-out count must leave at least one connected training entity");
  std::vector<char> held(static_cast<std::size_t>(g.num_entities()), 0);
  for (Index k = 0; k < o.num_holdout; ++k) held[static_cast<std::size_t>(candidates[static_cast<std::size_t>(k)])] = 1;
  auto is_held = [&](Index e) { return held[static_cast<std::size_t>(e)] != 0; };

  std::vector<Triple> train, observed, estimated;
  for (const auto& t : g.triples()) {
    if (!is_held(t.head) && !is_held(t.tail))
      train.push_back(t);
    else
      (coin(rng) < o.observed_fraction ? observed : estimated).push_back(t);
  }
  std::vector<char> seen(static_cast<std::size_t>(g.num_entities()), 0), trained(seen);
  for (const auto& t : train) trained[static_cast<std::size_t>(t.head)] = trained[static_cast<std::size_t>(t.tail)] = 1;
  seen = trained;
  for (const auto& t : observed) seen[static_cast<std::size_t>(t.head)] = seen[static_cast<std::size_t>(t.tail)] = 1;
  for (auto it = estimated.begin(); it != estimated.end();) {
    const bool orphan = !seen[static_cast<std::size_t>(it->head)] || !seen[static_cast<std::size_t>(it->tail)];
    if (orphan) {
      seen[static_cast<std::size_t>(it->head)] = seen[static_cast<std::size_t>(it->tail)] = 1;
      observed.push_back(*it);
      it = estimated.erase(it);
    } else {
      ++it;
    }
  }

  const auto& ev = g.entities();
  KnowledgeGraph tr(Vocabulary{}, g.relations());
  for (Index e = 0; e < g.num_entities(); ++e)
    if (trained[static_cast<std::size_t>(e)]) tr.entities().add(ev.label(e));
  for (const auto& t : train) tr.add(ev.label(t.head), g.relations().label(t.relation), ev.label(t.tail));

  KnowledgeGraph obs(tr.entities(), g.relations());
  for (const auto& t : train) obs.add(ev.label(t.head), g.relations().label(t.relation), ev.label(t.tail));
  for (const auto& t : observed) obs.add(ev.label(t.head), g.relations().label(t.relation), ev.label(t.tail));
  std::vector<Triple> est;
  for (const auto& t : estimated)
    est.push_back({*obs.entities().find(ev.label(t.head)), t.relation, *obs.entities().find(ev.label(t.tail))});
  return build_split_bundle(std::move(tr), std::move(obs), std::move(est), SplitMode::semi_inductive);
}

}  // namespace kgsheaf
