// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace kgsheaf {

using Index = Eigen::Index;

/// Dense real matrix (column-major, Eigen default).
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Row-major table; one row per entity (or relation). Flattening a table
/// yields the node-block ordering used by every sheaf operator.
using Table = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<const Vector> flatten(const Table& t) {
  return Eigen::Map<const Vector>(t.data(), t.size());
}

inline Eigen::Map<Vector> flatten(Table& t) { return Eigen::Map<Vector>(t.data(), t.size()); }

inline Table unflatten(const Vector& v, Index rows, Index cols) {
  Table t(rows, cols);
  flatten(t) = v;
  return t;
}

// Error hierarchy. The CLI maps these onto exit statuses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input (bad TSV line, bad JSON, bad checkpoint).
class ParseError : public Error {
 public:
  using Error::Error;
};
/// Label not present in a frozen vocabulary.
class UnknownSymbolError : public Error {
 public:
  using Error::Error;
};
/// Relation vocabularies disagree, or a relation has no representation.
class SchemaError : public Error {
 public:
  using Error::Error;
};
/// Some entity referenced by evaluation data has no row/embedding.
class CoverageError : public Error {
 public:
  using Error::Error;
};
class DimensionError : public Error {
 public:
  using Error::Error;
};
class IndexError : public Error {
 public:
  using Error::Error;
};
class ShapeError : public Error {
 public:
  using Error::Error;
};
/// Non-finite values, divergence, or a problem too large for a dense solve.
class NumericError : public Error {
 public:
  using Error::Error;
};
/// Caller violated an operation contract (bad argument combination).
class ContractError : public Error {
 public:
  using Error::Error;
};
class FileError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Worker count from KGSHEAF_THREADS; falls back to the hardware count.
inline unsigned worker_count() {
  if (const char* env = std::getenv("KGSHEAF_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunks write to
/// disjoint outputs, so results do not depend on the worker count.
template <typename Body>
void parallel_for(Index n, Body&& body, Index min_chunk = 256) {
  const unsigned workers = worker_count();
  if (workers <= 1 || n <= min_chunk) {
    body(Index{0}, n);
    return;
  }
  const Index chunks = std::min<Index>(workers, (n + min_chunk - 1) / min_chunk);
  const Index step = (n + chunks - 1) / chunks;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(chunks));
  for (Index c = 0; c < chunks; ++c) {
    const Index lo = c * step;
    const Index hi = std::min(n, lo + step);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace kgsheaf
