// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/block_sparse.hpp"
#include "kgsheaf/kg.hpp"
#include "kgsheaf/relation.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <tuple>
#include <vector>

namespace kgsheaf {

/// Coboundary of a knowledge sheaf. Edge e = (h, r, t) contributes the
/// block row  delta(x)_e = R_t x_t - R_h x_h  with translation target r_r,
/// so the Dirichlet energy is |delta x - r|^2.
class Coboundary {
 public:
  Coboundary() = default;
  Coboundary(Index nodes, std::vector<Triple> edges, RelationSet reps)
      : nodes_(nodes), edges_(std::move(edges)), reps_(std::move(reps)) {
    dim_ = check_relation_set(reps_);
    for (const auto& e : edges_) {
      if (e.relation < 0 || e.relation >= static_cast<Index>(reps_.size()))
        throw SchemaError("no representation for relation id " + std::to_string(e.relation));
      if (e.head < 0 || e.head >= nodes_ || e.tail < 0 || e.tail >= nodes_)
        throw IndexError("edge endpoint out of range");
    }
    if (dim_ == 0 && !edges_.empty()) throw DimensionError("relation representations have zero dimension");
  }

  Index nodes() const { return nodes_; }
  Index dim() const { return dim_; }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  const std::vector<Triple>& edges() const { return edges_; }
  const RelationSet& relations() const { return reps_; }
  const RelationRepresentation& rep(const Triple& e) const { return reps_[static_cast<std::size_t>(e.relation)]; }

  /// Stacked translation vector r (one d-block per edge).
  Vector translations() const {
    Vector r(num_edges() * dim_);
    for (Index k = 0; k < num_edges(); ++k) r.segment(k * dim_, dim_) = rep(edges_[static_cast<std::size_t>(k)]).translation;
    return r;
  }

  /// delta x, x laid out node-block-wise (n * d).
  Vector apply(const Vector& x) const {
    if (x.size() != nodes_ * dim_) throw DimensionError("coboundary apply: dimension mismatch");
    Vector y(num_edges() * dim_);
    for (Index k = 0; k < num_edges(); ++k) {
      const auto& e = edges_[static_cast<std::size_t>(k)];
      const auto& rr = rep(e);
      y.segment(k * dim_, dim_).noalias() = rr.tail * x.segment(e.tail * dim_, dim_) - rr.head * x.segment(e.head * dim_, dim_);
    }
    return y;
  }

  /// delta^T y, y laid out edge-block-wise (m * d).
  Vector apply_transpose(const Vector& y) const {
    if (y.size() != num_edges() * dim_) throw DimensionError("coboundary transpose: dimension mismatch");
    Vector x = Vector::Zero(nodes_ * dim_);
    for (Index k = 0; k < num_edges(); ++k) {
      const auto& e = edges_[static_cast<std::size_t>(k)];
      const auto& rr = rep(e);
      const auto ye = y.segment(k * dim_, dim_);
      x.segment(e.tail * dim_, dim_).noalias() += rr.tail.transpose() * ye;
      x.segment(e.head * dim_, dim_).noalias() -= rr.head.transpose() * ye;
    }
    return x;
  }

  Matrix to_dense() const {
    Matrix m = Matrix::Zero(num_edges() * dim_, nodes_ * dim_);
    for (Index k = 0; k < num_edges(); ++k) {
      const auto& e = edges_[static_cast<std::size_t>(k)];
      const auto& rr = rep(e);
      m.block(k * dim_, e.tail * dim_, dim_, dim_) += rr.tail;
      m.block(k * dim_, e.head * dim_, dim_, dim_) -= rr.head;
    }
    return m;
  }

 private:
  Index nodes_ = 0;
  Index dim_ = 0;
  std::vector<Triple> edges_;
  RelationSet reps_;
};

inline Coboundary assemble_coboundary(const KnowledgeGraph& graph, const RelationSet& reps) {
  if (static_cast<Index>(reps.size()) < graph.num_relations())
    throw SchemaError("graph has " + std::to_string(graph.num_relations()) + " relations but only " +
                      std::to_string(reps.size()) + " representations");
  return Coboundary(graph.num_entities(), graph.triples(), reps);
}

/// L = delta^T delta, assembled edge by edge.
inline BlockSparseSymmetric assemble_laplacian(const Coboundary& delta) {
  BlockSparseSymmetric L(delta.nodes(), delta.dim());
  for (const auto& e : delta.edges()) {
    const auto& rr = delta.rep(e);
    if (e.head == e.tail) {
      const Matrix c = rr.tail - rr.head;
      L.add_block(e.tail, e.tail, c.transpose() * c);
      continue;
    }
    L.add_block(e.tail, e.tail, rr.tail.transpose() * rr.tail);
    L.add_block(e.head, e.head, rr.head.transpose() * rr.head);
    L.add_block(e.tail, e.head, -rr.tail.transpose() * rr.head);
  }
  return L;
}

/// Coordinate frame for extension and query scoring. `normalized` works
/// with D^{-1/2} L D^{-1/2} in rescaled coordinates y = D^{1/2} x; `raw`
/// uses L and x directly.
enum class Frame { normalized, raw };

/// Coboundary, Laplacian, block degree and the normalized Laplacian of one
/// knowledge sheaf.
struct SheafSystem {
  Coboundary coboundary;
  BlockSparseSymmetric laplacian;
  std::vector<Matrix> degree;        // D_v = L_vv
  std::vector<Matrix> scale;         // S_v = D_v^{-1/2} (pseudo-inverse)
  std::vector<Matrix> sqrt_degree;   // D_v^{1/2} on the retained eigenspace
  BlockSparseSymmetric normalized;   // S L S

  Index nodes() const { return coboundary.nodes(); }
  Index dim() const { return coboundary.dim(); }

  const BlockSparseSymmetric& op(Frame f) const { return f == Frame::normalized ? normalized : laplacian; }

  /// Blockwise product with S (to_raw) or D^{1/2} (to_scaled) on a flat vector.
  Vector to_raw(const Vector& y) const { return blockwise(scale, y); }
  Vector to_scaled(const Vector& x) const { return blockwise(sqrt_degree, x); }

  Vector to_raw(const Vector& y, const std::vector<Index>& ids) const { return blockwise(scale, y, ids); }
  Vector to_scaled(const Vector& x, const std::vector<Index>& ids) const { return blockwise(sqrt_degree, x, ids); }

  /// Coboundary of the frame: delta (raw) or delta S (normalized).
  Vector coboundary_apply(Frame f, const Vector& x) const {
    return coboundary.apply(f == Frame::normalized ? to_raw(x) : x);
  }
  Vector coboundary_transpose(Frame f, const Vector& y) const {
    Vector x = coboundary.apply_transpose(y);
    return f == Frame::normalized ? to_raw(x) : x;
  }

 private:
  Vector blockwise(const std::vector<Matrix>& blocks, const Vector& x) const {
    const Index d = dim();
    if (x.size() != nodes() * d) throw DimensionError("blockwise transform: dimension mismatch");
    Vector y(x.size());
    for (Index i = 0; i < nodes(); ++i) y.segment(i * d, d).noalias() = blocks[static_cast<std::size_t>(i)] * x.segment(i * d, d);
    return y;
  }
  Vector blockwise(const std::vector<Matrix>& blocks, const Vector& x, const std::vector<Index>& ids) const {
    const Index d = dim();
    if (x.size() != static_cast<Index>(ids.size()) * d) throw DimensionError("blockwise transform: dimension mismatch");
    Vector y(x.size());
    for (std::size_t k = 0; k < ids.size(); ++k)
      y.segment(static_cast<Index>(k) * d, d).noalias() = blocks[static_cast<std::size_t>(ids[k])] * x.segment(static_cast<Index>(k) * d, d);
    return y;
  }
};

inline constexpr double kDefaultPinvCutoff = 1e-10;

/// Eigen-based inverse square root and square root of a symmetric PSD
/// block. Eigenvalues below cutoff * lambda_max map to 0 in both.
inline std::pair<Matrix, Matrix> psd_inverse_sqrt(const Matrix& block, double cutoff) {
  const Index d = block.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (block + block.transpose()));
  const Vector& lam = es.eigenvalues();
  const double lmax = lam.size() > 0 ? lam.maxCoeff() : 0.0;
  Vector inv(d), sq(d);
  for (Index k = 0; k < d; ++k) {
    if (lmax > 0.0 && lam(k) > cutoff * lmax) {
      sq(k) = std::sqrt(lam(k));
      inv(k) = 1.0 / sq(k);
    } else {
      sq(k) = 0.0;
      inv(k) = 0.0;
    }
  }
  const Matrix& q = es.eigenvectors();
  return {q * inv.asDiagonal() * q.transpose(), q * sq.asDiagonal() * q.transpose()};
}

inline SheafSystem normalize(Coboundary delta, BlockSparseSymmetric L, double cutoff = kDefaultPinvCutoff) {
  SheafSystem s;
  const Index n = L.nodes();
  const Index d = L.dim();
  s.degree.resize(static_cast<std::size_t>(n));
  s.scale.resize(static_cast<std::size_t>(n));
  s.sqrt_degree.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    s.degree[k] = L.block(i, i);
    std::tie(s.scale[k], s.sqrt_degree[k]) = psd_inverse_sqrt(s.degree[k], cutoff);
  }
  BlockSparseSymmetric N(n, d);
  for (const auto& [key, b] : L.blocks()) {
    Matrix nb = s.scale[static_cast<std::size_t>(key.first)] * b * s.scale[static_cast<std::size_t>(key.second)];
    if (key.first == key.second) nb = 0.5 * (nb + nb.transpose());
    N.add_block(key.first, key.second, nb);
  }
  s.coboundary = std::move(delta);
  s.laplacian = std::move(L);
  s.normalized = std::move(N);
  return s;
}

inline SheafSystem build_sheaf_system(const Coboundary& delta, double cutoff = kDefaultPinvCutoff) {
  return normalize(delta, assemble_laplacian(delta), cutoff);
}

inline SheafSystem build_sheaf_system(const KnowledgeGraph& graph, const RelationSet& reps,
                                      double cutoff = kDefaultPinvCutoff) {
  return build_sheaf_system(assemble_coboundary(graph, reps), cutoff);
}

/// E(x) = sum over edges |R_h x_h + r - R_t x_t|^p.
inline double energy(const Table& x, const KnowledgeGraph& graph, const RelationSet& reps, int p = 2) {
  if (x.rows() != graph.num_entities()) throw DimensionError("energy: need one row per entity");
  double e = 0.0;
  for (const auto& t : graph.triples()) {
    const auto& rr = reps[static_cast<std::size_t>(t.relation)];
    const double sq = (rr.head * x.row(t.head).transpose() + rr.translation - rr.tail * x.row(t.tail).transpose()).squaredNorm();
    e += p == 1 ? std::sqrt(sq) : sq;
  }
  return e;
}

/// |delta x - r|^2 on a flat vector.
inline double energy(const Coboundary& delta, const Vector& x) {
  return (delta.apply(x) - delta.translations()).squaredNorm();
}

}  // namespace kgsheaf
