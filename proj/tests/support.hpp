// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/kgsheaf.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace kgsheaf::testing {

using Rng = std::mt19937_64;

inline double gauss(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline Index uniform_index(Rng& rng, Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); }

inline Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = gauss(rng);
  return m;
}

inline Vector random_vector(Index n, Rng& rng) { return random_matrix(n, 1, rng); }

inline Table random_table(Index rows, Index cols, Rng& rng) {
  Table t(rows, cols);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = gauss(rng);
  return t;
}

/// Random spanning tree plus `extra` distinct non-loop edges. Every node is
/// incident to at least one edge when n >= 2.
inline std::vector<Triple> random_connected_edges(Index n, Index extra, Index num_relations, Rng& rng) {
  std::vector<Triple> out;
  std::set<std::pair<Index, Index>> used;
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);
  auto add = [&](Index a, Index b) {
    if (a == b || used.count({a, b}) || used.count({b, a})) return false;
    used.insert({a, b});
    out.push_back({a, uniform_index(rng, 0, num_relations - 1), b});
    return true;
  };
  for (Index k = 1; k < n; ++k) {
    const Index parent = order[static_cast<std::size_t>(uniform_index(rng, 0, k - 1))];
    const Index child = order[static_cast<std::size_t>(k)];
    if (uniform_index(rng, 0, 1)) add(parent, child);
    else add(child, parent);
  }
  const Index max_edges = n * (n - 1) / 2;
  for (Index k = 0; k < extra && static_cast<Index>(out.size()) < max_edges; ++k) {
    for (int tries = 0; tries < 100; ++tries)
      if (add(uniform_index(rng, 0, n - 1), uniform_index(rng, 0, n - 1))) break;
  }
  return out;
}

enum class RepKind { trivial, SE, TransE, TransR, RotatE, general };

/// Random relation representations of a given kind.
inline RelationSet random_reps(RepKind kind, Index num_relations, Index d, Rng& rng) {
  RelationSet reps(static_cast<std::size_t>(num_relations));
  const Matrix eye = Matrix::Identity(d, d);
  for (auto& r : reps) {
    r.head = eye;
    r.tail = eye;
    r.translation = Vector::Zero(d);
    switch (kind) {
      case RepKind::trivial: break;
      case RepKind::SE:
        r.head = random_matrix(d, d, rng);
        r.tail = random_matrix(d, d, rng);
        break;
      case RepKind::TransE: r.translation = random_vector(d, rng); break;
      case RepKind::TransR:
        r.head = random_matrix(d, d, rng);
        r.tail = r.head;
        r.translation = random_vector(d, rng);
        break;
      case RepKind::RotatE: {
        Eigen::RowVectorXd th(d / 2);
        for (Index k = 0; k < d / 2; ++k) th(k) = std::uniform_real_distribution<double>(-3.14, 3.14)(rng);
        r.head = rotation_blocks(th);
        break;
      }
      case RepKind::general:
        r.head = random_matrix(d, d, rng);
        r.tail = random_matrix(d, d, rng);
        r.translation = random_vector(d, rng);
        break;
    }
  }
  return reps;
}

/// SE-style maps Q diag(s) with Q random orthogonal and s in [0.5, 1.5],
/// so every map has condition number at most 3.
inline RelationSet conditioned_reps(Index num_relations, Index d, bool translations, Rng& rng) {
  RelationSet reps(static_cast<std::size_t>(num_relations));
  std::uniform_real_distribution<double> scale(0.5, 1.5);
  auto map = [&] {
    const Matrix q = Eigen::HouseholderQR<Matrix>(random_matrix(d, d, rng)).householderQ();
    Vector s(d);
    for (Index i = 0; i < d; ++i) s(i) = scale(rng);
    return Matrix(q * s.asDiagonal());
  };
  for (auto& r : reps) {
    r.head = map();
    r.tail = map();
    r.translation = translations ? random_vector(d, rng) : Vector::Zero(d);
  }
  return reps;
}

inline KnowledgeGraph graph_from_edges(Index n, Index num_relations, const std::vector<Triple>& edges) {
  Vocabulary e, r;
  for (Index i = 0; i < n; ++i) e.add("n" + std::to_string(i));
  for (Index i = 0; i < num_relations; ++i) r.add("r" + std::to_string(i));
  KnowledgeGraph g(std::move(e), std::move(r));
  for (const auto& t : edges) g.add(t);
  return g;
}

/// Dense coboundary built directly from the edge list: row block e holds
/// -R_h at the head column and +R_t at the tail column.
inline Matrix dense_coboundary(Index n, const std::vector<Triple>& edges, const RelationSet& reps) {
  const Index d = reps.front().head.rows();
  Matrix m = Matrix::Zero(static_cast<Index>(edges.size()) * d, n * d);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& t = edges[e];
    const auto& rep = reps[static_cast<std::size_t>(t.relation)];
    m.block(static_cast<Index>(e) * d, t.head * d, d, d) -= rep.head;
    m.block(static_cast<Index>(e) * d, t.tail * d, d, d) += rep.tail;
  }
  return m;
}

inline Vector stacked_translations(const std::vector<Triple>& edges, const RelationSet& reps) {
  const Index d = reps.front().head.rows();
  Vector r(static_cast<Index>(edges.size()) * d);
  for (std::size_t e = 0; e < edges.size(); ++e)
    r.segment(static_cast<Index>(e) * d, d) = reps[static_cast<std::size_t>(edges[e].relation)].translation;
  return r;
}

/// Columns of a dense operator for the listed node blocks.
inline Matrix node_columns(const Matrix& m, const std::vector<Index>& ids, Index d) {
  Matrix out(m.rows(), static_cast<Index>(ids.size()) * d);
  for (std::size_t k = 0; k < ids.size(); ++k) out.middleCols(static_cast<Index>(k) * d, d) = m.middleCols(ids[k] * d, d);
  return out;
}

inline Matrix node_block(const Matrix& m, const std::vector<Index>& rows, const std::vector<Index>& cols, Index d) {
  Matrix out(static_cast<Index>(rows.size()) * d, static_cast<Index>(cols.size()) * d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out.block(static_cast<Index>(i) * d, static_cast<Index>(j) * d, d, d) = m.block(rows[i] * d, cols[j] * d, d, d);
  return out;
}

/// Boundary/interior split with `nb` boundary nodes chosen at random.
inline std::pair<std::vector<Index>, std::vector<Index>> random_partition(Index n, Index nb, Rng& rng) {
  std::vector<Index> ids(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<Index> b(ids.begin(), ids.begin() + nb), u(ids.begin() + nb, ids.end());
  std::sort(b.begin(), b.end());
  std::sort(u.begin(), u.end());
  return {b, u};
}

inline Table rows_of(const Table& x, const std::vector<Index>& ids) {
  Table out(static_cast<Index>(ids.size()), x.cols());
  for (std::size_t k = 0; k < ids.size(); ++k) out.row(static_cast<Index>(k)) = x.row(ids[k]);
  return out;
}

inline double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

/// Loss written directly from its definition using score_triple only.
/// `frozen` carries nssa weights from the base point.
inline double reference_loss(const ModelParams& p, const std::vector<Triple>& pos, const std::vector<Triple>& neg,
                             const TrainConfig& c, const std::vector<double>* frozen, std::vector<double>* weights_out) {
  const int ex = c.score_exponent;
  const std::size_t n = pos.empty() ? 0 : neg.size() / pos.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const double f = score_triple(p, pos[i].head, pos[i].relation, pos[i].tail, ex);
    std::vector<double> fn(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& t = neg[i * n + j];
      fn[j] = score_triple(p, t.head, t.relation, t.tail, ex);
    }
    switch (c.loss) {
      case LossKind::bce:
        loss -= log_sigmoid(-f);
        for (double v : fn) loss -= log_sigmoid(v);
        break;
      case LossKind::margin:
        for (double v : fn) loss += std::max(0.0, f + c.margin - v);
        break;
      case LossKind::crossentropy: {
        double z = 0.0;
        for (Index t = 0; t < p.num_entities(); ++t) z += std::exp(-score_triple(p, pos[i].head, pos[i].relation, t, ex));
        loss += f + std::log(z);
        break;
      }
      case LossKind::nssa: {
        std::vector<double> w(n);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += (w[j] = std::exp(c.adversarial_temperature * (c.margin - fn[j])));
        for (auto& v : w) v /= s;
        if (frozen) w.assign(frozen->begin() + static_cast<std::ptrdiff_t>(i * n), frozen->begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
        if (weights_out) weights_out->insert(weights_out->end(), w.begin(), w.end());
        loss -= log_sigmoid(c.margin - f);
        for (std::size_t j = 0; j < n; ++j) loss -= w[j] * log_sigmoid(fn[j] - c.margin);
        break;
      }
    }
  }
  return loss;
}

/// Largest relative error |a - n| / max(1, |a|, |n|) between analytic
/// gradients and central differences of reference_loss at one random point.
inline double gradient_check_point(ModelFamily family, LossKind loss, int exponent, Rng& rng) {
  const Index d = 4, ne = 7, nr = 3, n_neg = 3;
  auto p = init_params(family, d, ne, nr, rng());
  for (auto& [name, t] : p.tensors())
    for (Index i = 0; i < t->size(); ++i) t->data()[i] += 0.3 * gauss(rng);
  std::vector<Triple> pos;
  for (int k = 0; k < 4; ++k)
    pos.push_back({uniform_index(rng, 0, ne - 1), uniform_index(rng, 0, nr - 1), uniform_index(rng, 0, ne - 1)});
  const auto neg = sample_negatives(pos, ne, n_neg, CorruptionMode::corrupt_both, rng());
  TrainConfig c;
  c.loss = loss;
  c.score_exponent = exponent;
  c.margin = 2.0;
  c.adversarial_temperature = 0.7;
  const auto lg = loss_and_grad(p, pos, neg, c);
  std::vector<double> weights;
  reference_loss(p, pos, neg, c, nullptr, &weights);
  const auto* frozen = loss == LossKind::nssa ? &weights : nullptr;
  const double eps = 1e-5;
  double worst = 0.0;
  auto grads = lg.grad.tensors();
  auto params = p.tensors();
  for (std::size_t k = 0; k < params.size(); ++k) {
    Table& t = *params[k].second;
    for (Index i = 0; i < t.size(); ++i) {
      const double saved = t.data()[i];
      t.data()[i] = saved + eps;
      const double up = reference_loss(p, pos, neg, c, frozen, nullptr);
      t.data()[i] = saved - eps;
      const double down = reference_loss(p, pos, neg, c, frozen, nullptr);
      t.data()[i] = saved;
      const double numeric = (up - down) / (2 * eps), analytic = grads[k].second->data()[i];
      worst = std::max(worst, std::abs(numeric - analytic) / std::max({1.0, std::abs(numeric), std::abs(analytic)}));
    }
  }
  return worst;
}

inline std::string to_string(RepKind k) {
  switch (k) {
    case RepKind::trivial: return "trivial";
    case RepKind::SE: return "SE";
    case RepKind::TransE: return "TransE";
    case RepKind::TransR: return "TransR";
    case RepKind::RotatE: return "RotatE";
    case RepKind::general: return "general";
  }
  return "?";
}

// Readable parameter values in test names and failure messages.
inline void PrintTo(RepKind k, std::ostream* os) { *os << to_string(k); }

}  // namespace kgsheaf::testing

namespace kgsheaf {

inline void PrintTo(ModelFamily f, std::ostream* os) { *os << to_string(f); }
inline void PrintTo(LossKind k, std::ostream* os) { *os << to_string(k); }
inline void PrintTo(QueryShape s, std::ostream* os) { *os << to_string(s); }
inline void PrintTo(Frame f, std::ostream* os) { *os << (f == Frame::raw ? "raw" : "normalized"); }

}  // namespace kgsheaf
