// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/common.hpp"

#include <vector>

namespace kgsheaf {

/// Restriction data of one relation: the head map, the tail map and the
/// translation. A triple (h, r, t) has energy |head * x_h + translation - tail * x_t|^2.
struct RelationRepresentation {
  Matrix head;
  Matrix tail;
  Vector translation;

  Index dim() const { return head.rows(); }
};

using RelationSet = std::vector<RelationRepresentation>;

inline Index check_relation_set(const RelationSet& reps) {
  if (reps.empty()) return 0;
  const Index d = reps.front().dim();
  for (const auto& r : reps) {
    if (r.head.rows() != d || r.head.cols() != d || r.tail.rows() != d || r.tail.cols() != d ||
        r.translation.size() != d)
      throw DimensionError("relation representations must share one stalk dimension");
    if (!r.head.allFinite() || !r.tail.allFinite() || !r.translation.allFinite())
      throw NumericError("relation representation has non-finite entries");
  }
  return d;
}

inline bool has_translations(const RelationSet& reps) {
  for (const auto& r : reps)
    if (r.translation.squaredNorm() != 0.0) return true;
  return false;
}

}  // namespace kgsheaf
