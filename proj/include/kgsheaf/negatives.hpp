// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/kg.hpp"

#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace kgsheaf {

enum class CorruptionMode { corrupt_tail, corrupt_both };

inline CorruptionMode parse_corruption_mode(std::string_view s) {
  if (s == "corrupt_tail" || s == "tail") return CorruptionMode::corrupt_tail;
  if (s == "corrupt_both" || s == "both") return CorruptionMode::corrupt_both;
  throw UsageError("unknown corruption mode '" + std::string(s) + "'");
}

inline std::string to_string(CorruptionMode m) {
  return m == CorruptionMode::corrupt_both ? "corrupt_both" : "corrupt_tail";
}

/// n corruptions per positive, laid out contiguously: negatives[i*n + j]
/// corrupts batch[i]. The replacement entity is uniform over all entities
/// other than the one it replaces.
template <typename Rng>
std::vector<Triple> sample_negatives(const std::vector<Triple>& batch, Index num_entities, Index n,
                                     CorruptionMode mode, Rng& rng) {
  if (n < 1) throw ContractError("negative sample count must be >= 1");
  if (num_entities < 2) throw ContractError("cannot corrupt triples with fewer than 2 entities");
  std::uniform_int_distribution<Index> pick(0, num_entities - 2);
  std::bernoulli_distribution coin(0.5);
  auto other_than = [&](Index original) {
    Index e = pick(rng);
    return e >= original ? e + 1 : e;
  };
  std::vector<Triple> out;
  out.reserve(batch.size() * static_cast<std::size_t>(n));
  for (const auto& pos : batch) {
    for (Index j = 0; j < n; ++j) {
      Triple neg = pos;
      if (mode == CorruptionMode::corrupt_both && coin(rng))
        neg.head = other_than(pos.head);
      else
        neg.tail = other_than(pos.tail);
      out.push_back(neg);
    }
  }
  return out;
}

inline std::vector<Triple> sample_negatives(const std::vector<Triple>& batch, Index num_entities, Index n,
                                            CorruptionMode mode, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_negatives(batch, num_entities, n, mode, rng);
}

}  // namespace kgsheaf
