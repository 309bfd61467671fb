// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/common.hpp"

#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace kgsheaf {

/// Symmetric matrix of n x n dense d x d blocks. Only blocks (i, j) with
/// i <= j are stored; L[j, i] = L[i, j]^T is implied. Sparsity is at the
/// node-pair level.
class BlockSparseSymmetric {
 public:
  using Key = std::pair<Index, Index>;

  BlockSparseSymmetric() = default;
  BlockSparseSymmetric(Index nodes, Index dim) : nodes_(nodes), dim_(dim), rows_(static_cast<std::size_t>(nodes)) {}

  Index nodes() const { return nodes_; }
  Index dim() const { return dim_; }
  Index size() const { return nodes_ * dim_; }
  const std::map<Key, Matrix>& blocks() const { return blocks_; }

  /// Accumulates `b` into block (i, j) (and b^T into (j, i)). For i == j the
  /// caller is responsible for keeping the diagonal block symmetric.
  void add_block(Index i, Index j, const Matrix& b) {
    check_node(i);
    check_node(j);
    if (b.rows() != dim_ || b.cols() != dim_) throw DimensionError("block has wrong size");
    if (i <= j)
      slot(i, j) += b;
    else
      slot(j, i) += b.transpose();
  }

  /// Block (i, j), or zero when absent.
  Matrix block(Index i, Index j) const {
    check_node(i);
    check_node(j);
    if (i <= j) {
      auto it = blocks_.find({i, j});
      return it == blocks_.end() ? Matrix::Zero(dim_, dim_) : it->second;
    }
    auto it = blocks_.find({j, i});
    return it == blocks_.end() ? Matrix::Zero(dim_, dim_) : Matrix(it->second.transpose());
  }

  bool has_block(Index i, Index j) const { return blocks_.count(i <= j ? Key{i, j} : Key{j, i}) != 0; }

  /// Blockwise y = M x.
  Vector apply(const Vector& x) const {
    if (x.size() != size())
      throw DimensionError("apply: vector of size " + std::to_string(x.size()) + " for a matrix of size " +
                           std::to_string(size()));
    Vector y(size());
    parallel_for(nodes_, [&](Index lo, Index hi) {
      for (Index i = lo; i < hi; ++i) y.segment(i * dim_, dim_) = row_product(i, x);
    }, 512);
    return y;
  }

  /// Row block i of M x.
  Vector row_product(Index i, const Vector& x) const {
    Vector acc = Vector::Zero(dim_);
    for (const auto& e : rows_[static_cast<std::size_t>(i)]) {
      if (e.transposed)
        acc.noalias() += e.block->transpose() * x.segment(e.col * dim_, dim_);
      else
        acc.noalias() += *e.block * x.segment(e.col * dim_, dim_);
    }
    return acc;
  }

  Matrix to_dense() const {
    Matrix m = Matrix::Zero(size(), size());
    for (const auto& [k, b] : blocks_) {
      m.block(k.first * dim_, k.second * dim_, dim_, dim_) = b;
      if (k.first != k.second) m.block(k.second * dim_, k.first * dim_, dim_, dim_) = b.transpose();
    }
    return m;
  }

  struct RowEntry {
    Index col;
    const Matrix* block;
    bool transposed;
  };
  const std::vector<RowEntry>& row(Index i) const { return rows_[static_cast<std::size_t>(i)]; }

 private:
  void check_node(Index i) const {
    if (i < 0 || i >= nodes_) throw IndexError("node index " + std::to_string(i) + " out of range");
  }

  Matrix& slot(Index i, Index j) {
    auto [it, inserted] = blocks_.try_emplace(Key{i, j});
    if (inserted) {
      it->second = Matrix::Zero(dim_, dim_);
      rows_[static_cast<std::size_t>(i)].push_back({j, &it->second, false});
      if (i != j) rows_[static_cast<std::size_t>(j)].push_back({i, &it->second, true});
    }
    return it->second;
  }

  Index nodes_ = 0;
  Index dim_ = 0;
  std::map<Key, Matrix> blocks_;
  std::vector<std::vector<RowEntry>> rows_;

 public:
  // The row index holds pointers into blocks_, so copies rebuild it.
  BlockSparseSymmetric(const BlockSparseSymmetric& o) : nodes_(o.nodes_), dim_(o.dim_), rows_(o.rows_.size()) {
    for (const auto& [k, b] : o.blocks_) slot(k.first, k.second) = b;
  }
  BlockSparseSymmetric& operator=(const BlockSparseSymmetric& o) {
    if (this != &o) {
      BlockSparseSymmetric tmp(o);
      *this = std::move(tmp);
    }
    return *this;
  }
  BlockSparseSymmetric(BlockSparseSymmetric&&) noexcept = default;
  BlockSparseSymmetric& operator=(BlockSparseSymmetric&&) noexcept = default;
};

/// Rectangular selection M[rows, cols] of a block-sparse symmetric matrix.
/// Holds a pointer to the parent, which must outlive the view.
class BlockView {
 public:
  BlockView(const BlockSparseSymmetric& parent, std::vector<Index> rows, std::vector<Index> cols)
      : parent_(&parent), rows_(std::move(rows)), cols_(std::move(cols)),
        col_pos_(static_cast<std::size_t>(parent.nodes()), -1) {
    for (Index r : rows_)
      if (r < 0 || r >= parent.nodes()) throw IndexError("submatrix row id " + std::to_string(r) + " out of range");
    for (std::size_t k = 0; k < cols_.size(); ++k) {
      const Index c = cols_[k];
      if (c < 0 || c >= parent.nodes()) throw IndexError("submatrix column id " + std::to_string(c) + " out of range");
      col_pos_[static_cast<std::size_t>(c)] = static_cast<Index>(k);
    }
  }

  const std::vector<Index>& row_ids() const { return rows_; }
  const std::vector<Index>& col_ids() const { return cols_; }
  Index rows() const { return static_cast<Index>(rows_.size()) * parent_->dim(); }
  Index cols() const { return static_cast<Index>(cols_.size()) * parent_->dim(); }

  /// y = M[rows, cols] x, with x laid out in `col_ids()` order.
  Vector apply(const Vector& x) const {
    if (x.size() != cols()) throw DimensionError("submatrix apply: dimension mismatch");
    const Index d = parent_->dim();
    Vector y = Vector::Zero(rows());
    parallel_for(static_cast<Index>(rows_.size()), [&](Index lo, Index hi) {
      for (Index k = lo; k < hi; ++k) {
        auto seg = y.segment(k * d, d);
        for (const auto& e : parent_->row(rows_[static_cast<std::size_t>(k)])) {
          const Index pos = col_pos_[static_cast<std::size_t>(e.col)];
          if (pos < 0) continue;
          if (e.transposed)
            seg.noalias() += e.block->transpose() * x.segment(pos * d, d);
          else
            seg.noalias() += *e.block * x.segment(pos * d, d);
        }
      }
    }, 512);
    return y;
  }

  Matrix to_dense() const {
    const Index d = parent_->dim();
    Matrix m = Matrix::Zero(rows(), cols());
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      for (const auto& e : parent_->row(rows_[k])) {
        const Index pos = col_pos_[static_cast<std::size_t>(e.col)];
        if (pos < 0) continue;
        auto dst = m.block(static_cast<Index>(k) * d, pos * d, d, d);
        if (e.transposed)
          dst = e.block->transpose();
        else
          dst = *e.block;
      }
    }
    return m;
  }

 private:
  const BlockSparseSymmetric* parent_;
  std::vector<Index> rows_;
  std::vector<Index> cols_;
  std::vector<Index> col_pos_;
};

inline BlockView submatrix(const BlockSparseSymmetric& m, std::vector<Index> rows, std::vector<Index> cols) {
  return BlockView(m, std::move(rows), std::move(cols));
}

inline Vector apply(const BlockSparseSymmetric& m, const Vector& x) { return m.apply(x); }

/// Gathers node blocks `ids` of a flat vector.
inline Vector gather(const Vector& x, const std::vector<Index>& ids, Index d) {
  Vector out(static_cast<Index>(ids.size()) * d);
  for (std::size_t k = 0; k < ids.size(); ++k) out.segment(static_cast<Index>(k) * d, d) = x.segment(ids[k] * d, d);
  return out;
}

inline void scatter(Vector& x, const std::vector<Index>& ids, const Vector& values, Index d) {
  for (std::size_t k = 0; k < ids.size(); ++k) x.segment(ids[k] * d, d) = values.segment(static_cast<Index>(k) * d, d);
}

/// Debug export: a JSON header line, then one `i j di dj value` line per
/// scalar entry of every stored (upper-triangle) block.
inline void write_laplacian(std::ostream& out, const BlockSparseSymmetric& m) {
  nlohmann::json header{{"format", "kgsheaf-block-coo"}, {"n", m.nodes()}, {"d", m.dim()},
                        {"storage", "upper"}, {"blocks", m.blocks().size()}};
  out << header.dump() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& [k, b] : m.blocks())
    for (Index a = 0; a < m.dim(); ++a)
      for (Index c = 0; c < m.dim(); ++c) out << k.first << ' ' << k.second << ' ' << a << ' ' << c << ' ' << b(a, c) << '\n';
}

inline BlockSparseSymmetric read_laplacian(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("laplacian export: missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("laplacian export: bad header: ") + e.what());
  }
  const Index n = header.at("n").get<Index>();
  const Index d = header.at("d").get<Index>();
  std::map<BlockSparseSymmetric::Key, Matrix> blocks;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Index i, j, a, c;
    double v;
    if (!(ls >> i >> j >> a >> c >> v)) throw ParseError("laplacian export: bad entry line");
    auto [it, ins] = blocks.try_emplace({i, j});
    if (ins) it->second = Matrix::Zero(d, d);
    it->second(a, c) = v;
  }
  BlockSparseSymmetric m(n, d);
  for (const auto& [k, b] : blocks) m.add_block(k.first, k.second, b);
  return m;
}

}  // namespace kgsheaf
