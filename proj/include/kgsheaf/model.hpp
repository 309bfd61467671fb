// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/common.hpp"
#include "kgsheaf/relation.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kgsheaf {

enum class ModelFamily { SE, TransE, TransR, RotatE };

inline std::string to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::SE: return "SE";
    case ModelFamily::TransE: return "TransE";
    case ModelFamily::TransR: return "TransR";
    case ModelFamily::RotatE: return "RotatE";
  }
  return "?";
}

inline ModelFamily parse_model_family(std::string_view s) {
  if (s == "SE" || s == "se") return ModelFamily::SE;
  if (s == "TransE" || s == "transe") return ModelFamily::TransE;
  if (s == "TransR" || s == "transr") return ModelFamily::TransR;
  if (s == "RotatE" || s == "rotate") return ModelFamily::RotatE;
  throw UsageError("unknown model family '" + std::string(s) + "'");
}

/// Trainable tensors of one model. Relation matrices are stacked vertically:
/// relation r owns rows [r*d, (r+1)*d). Which tensors are populated depends
/// on the family:
///   SE     head_maps, tail_maps
///   TransE translations
///   TransR head_maps (shared head/tail map), translations
///   RotatE phases (d/2 angles per relation)
/// Unused tensors stay empty (0x0).
struct ModelParams {
  ModelFamily family = ModelFamily::TransE;
  Index dim = 0;
  Table entities;
  Table head_maps;
  Table tail_maps;
  Table translations;
  Table phases;

  Index num_entities() const { return entities.rows(); }
  Index num_relations() const {
    switch (family) {
      case ModelFamily::SE: return dim == 0 ? 0 : head_maps.rows() / dim;
      case ModelFamily::TransR: return dim == 0 ? 0 : head_maps.rows() / dim;
      case ModelFamily::TransE: return translations.rows();
      case ModelFamily::RotatE: return phases.rows();
    }
    return 0;
  }

  auto head_map(Index r) const { return head_maps.block(r * dim, 0, dim, dim); }
  auto head_map(Index r) { return head_maps.block(r * dim, 0, dim, dim); }
  auto tail_map(Index r) const { return tail_maps.block(r * dim, 0, dim, dim); }
  auto tail_map(Index r) { return tail_maps.block(r * dim, 0, dim, dim); }

  /// Named views of the populated tensors, in a fixed order.
  std::vector<std::pair<std::string, Table*>> tensors() {
    std::vector<std::pair<std::string, Table*>> out{{"entities", &entities}};
    if (head_maps.size() > 0) out.emplace_back("head_maps", &head_maps);
    if (tail_maps.size() > 0) out.emplace_back("tail_maps", &tail_maps);
    if (translations.size() > 0) out.emplace_back("translations", &translations);
    if (phases.size() > 0) out.emplace_back("phases", &phases);
    return out;
  }
  Table* tensor(std::string_view name) {
    if (name == "entities") return &entities;
    if (name == "head_maps") return &head_maps;
    if (name == "tail_maps") return &tail_maps;
    if (name == "translations") return &translations;
    if (name == "phases") return &phases;
    return nullptr;
  }
  std::vector<std::pair<std::string, const Table*>> tensors() const {
    std::vector<std::pair<std::string, const Table*>> out;
    for (auto& [name, t] : const_cast<ModelParams*>(this)->tensors()) out.emplace_back(name, t);
    return out;
  }

  /// Same shapes, all zeros. Used for gradients and optimizer moments.
  ModelParams zeros_like() const {
    ModelParams z = *this;
    for (auto& [name, t] : z.tensors()) t->setZero();
    return z;
  }

  bool all_finite() const {
    for (const auto& [name, t] : tensors())
      if (!t->allFinite()) return false;
    return true;
  }
};

/// 2x2 rotation by angle theta.
inline Eigen::Matrix2d rotation2(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix2d m;
  m << c, -s, s, c;
  return m;
}

inline Matrix rotation_blocks(const Eigen::Ref<const Eigen::RowVectorXd>& phases) {
  const Index k = phases.size();
  Matrix m = Matrix::Zero(2 * k, 2 * k);
  for (Index i = 0; i < k; ++i) m.block<2, 2>(2 * i, 2 * i) = rotation2(phases(i));
  return m;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_phase(double theta) {
  double y = std::remainder(theta, 2.0 * std::numbers::pi);
  if (y <= -std::numbers::pi) y += 2.0 * std::numbers::pi;
  return y;
}

inline ModelParams init_params(ModelFamily family, Index dim, Index num_entities, Index num_relations,
                               std::uint64_t seed) {
  if (dim < 1) throw DimensionError("embedding dimension must be >= 1");
  if (family == ModelFamily::RotatE && dim % 2 != 0)
    throw DimensionError("RotatE requires an even embedding dimension");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> entity_dist(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::normal_distribution<double> map_dist(0.0, 0.1 / std::sqrt(static_cast<double>(dim)));
  std::uniform_real_distribution<double> small(-0.1, 0.1);

  ModelParams p;
  p.family = family;
  p.dim = dim;
  p.entities.resize(num_entities, dim);
  for (Index i = 0; i < p.entities.size(); ++i) p.entities.data()[i] = entity_dist(rng);

  auto init_maps = [&](Table& maps) {
    maps.resize(num_relations * dim, dim);
    for (Index r = 0; r < num_relations; ++r)
      for (Index i = 0; i < dim; ++i)
        for (Index j = 0; j < dim; ++j) maps(r * dim + i, j) = (i == j ? 1.0 : 0.0) + map_dist(rng);
  };
  auto init_uniform = [&](Table& t, Index rows, Index cols) {
    t.resize(rows, cols);
    for (Index i = 0; i < t.size(); ++i) t.data()[i] = small(rng);
  };

  switch (family) {
    case ModelFamily::SE:
      init_maps(p.head_maps);
      init_maps(p.tail_maps);
      break;
    case ModelFamily::TransE:
      init_uniform(p.translations, num_relations, dim);
      break;
    case ModelFamily::TransR:
      init_maps(p.head_maps);
      init_uniform(p.translations, num_relations, dim);
      break;
    case ModelFamily::RotatE:
      init_uniform(p.phases, num_relations, dim / 2);
      break;
  }
  return p;
}

/// Residual v = R_h x_h + r - R_t x_t of one triple; score is |v|^p.
inline Vector triple_residual(const ModelParams& params, Index h, Index r, Index t) {
  const auto xh = params.entities.row(h).transpose();
  const auto xt = params.entities.row(t).transpose();
  switch (params.family) {
    case ModelFamily::SE: return params.head_map(r) * xh - params.tail_map(r) * xt;
    case ModelFamily::TransE: return xh + params.translations.row(r).transpose() - xt;
    case ModelFamily::TransR: return params.head_map(r) * (xh - xt) + params.translations.row(r).transpose();
    case ModelFamily::RotatE: {
      Vector v(params.dim);
      for (Index k = 0; k < params.dim / 2; ++k)
        v.segment<2>(2 * k) = rotation2(params.phases(r, k)) * xh.segment<2>(2 * k) - xt.segment<2>(2 * k);
      return v;
    }
  }
  return {};
}

/// Energy of (h, r, t): |R_h x_h + r - R_t x_t|^p with p in {1, 2}. Lower is better.
inline double score_triple(const ModelParams& params, Index h, Index r, Index t, int p = 2) {
  const double sq = triple_residual(params, h, r, t).squaredNorm();
  return p == 1 ? std::sqrt(sq) : sq;
}

/// Lifts trained parameters into per-relation restriction maps.
inline RelationSet to_sheaf_form(const ModelParams& params) {
  const Index d = params.dim;
  const Index nr = params.num_relations();
  RelationSet reps(static_cast<std::size_t>(nr));
  const Matrix eye = Matrix::Identity(d, d);
  for (Index r = 0; r < nr; ++r) {
    auto& rep = reps[static_cast<std::size_t>(r)];
    switch (params.family) {
      case ModelFamily::SE:
        rep.head = params.head_map(r);
        rep.tail = params.tail_map(r);
        rep.translation = Vector::Zero(d);
        break;
      case ModelFamily::TransE:
        rep.head = eye;
        rep.tail = eye;
        rep.translation = params.translations.row(r).transpose();
        break;
      case ModelFamily::TransR:
        rep.head = params.head_map(r);
        rep.tail = params.head_map(r);
        rep.translation = params.translations.row(r).transpose();
        break;
      case ModelFamily::RotatE:
        rep.head = rotation_blocks(params.phases.row(r));
        rep.tail = eye;
        rep.translation = Vector::Zero(d);
        break;
    }
  }
  return reps;
}

/// Energy of a triple under sheaf-form representations and an arbitrary
/// entity table.
inline double sheaf_score(const RelationSet& reps, const Table& x, Index h, Index r, Index t, int p = 2) {
  const auto& rep = reps[static_cast<std::size_t>(r)];
  const double sq =
      (rep.head * x.row(h).transpose() + rep.translation - rep.tail * x.row(t).transpose()).squaredNorm();
  return p == 1 ? std::sqrt(sq) : sq;
}

}  // namespace kgsheaf
