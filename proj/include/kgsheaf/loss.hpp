// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/kg.hpp"
#include "kgsheaf/model.hpp"
#include "kgsheaf/negatives.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace kgsheaf {

enum class LossKind { bce, margin, crossentropy, nssa };

inline std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::bce: return "bce";
    case LossKind::margin: return "margin";
    case LossKind::crossentropy: return "crossentropy";
    case LossKind::nssa: return "nssa";
  }
  return "?";
}

inline LossKind parse_loss_kind(std::string_view s) {
  if (s == "bce") return LossKind::bce;
  if (s == "margin") return LossKind::margin;
  if (s == "crossentropy") return LossKind::crossentropy;
  if (s == "nssa") return LossKind::nssa;
  throw UsageError("unknown loss '" + std::string(s) + "'");
}

struct TrainConfig {
  LossKind loss = LossKind::crossentropy;
  double lr = 0.01;
  Index epochs = 100;
  Index batch_size = 128;
  Index num_negs_per_pos = 16;
  double margin = 1.0;
  double adversarial_temperature = 1.0;
  std::uint64_t seed = 0;
  int score_exponent = 2;
  CorruptionMode corruption = CorruptionMode::corrupt_tail;

  bool needs_negatives() const { return loss != LossKind::crossentropy; }

  void validate() const {
    if (!(lr > 0.0)) throw ContractError("learning rate must be positive");
    if (epochs < 0) throw ContractError("epochs must be >= 0");
    if (batch_size < 1) throw ContractError("batch size must be >= 1");
    if (margin < 0.0) throw ContractError("margin must be >= 0");
    if (!(adversarial_temperature > 0.0)) throw ContractError("adversarial temperature must be positive");
    if (score_exponent != 1 && score_exponent != 2) throw ContractError("score exponent must be 1 or 2");
    if ((loss == LossKind::margin || loss == LossKind::nssa) && num_negs_per_pos < 1)
      throw ContractError("margin and nssa losses need at least one negative per positive");
  }
};

namespace detail {

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
inline double log_sigmoid(double x) { return -softplus(-x); }

// A triple's residual splits as v = head_part(h, r) - tail_part(r, t).

inline Vector head_part(const ModelParams& p, Index h, Index r) {
  const auto xh = p.entities.row(h).transpose();
  switch (p.family) {
    case ModelFamily::SE: return p.head_map(r) * xh;
    case ModelFamily::TransE: return xh + p.translations.row(r).transpose();
    case ModelFamily::TransR: return p.head_map(r) * xh + p.translations.row(r).transpose();
    case ModelFamily::RotatE: {
      Vector v(p.dim);
      for (Index k = 0; k < p.dim / 2; ++k) v.segment<2>(2 * k) = rotation2(p.phases(r, k)) * xh.segment<2>(2 * k);
      return v;
    }
  }
  return {};
}

inline Vector tail_part(const ModelParams& p, Index r, Index t) {
  const auto xt = p.entities.row(t).transpose();
  switch (p.family) {
    case ModelFamily::SE: return p.tail_map(r) * xt;
    case ModelFamily::TransR: return p.head_map(r) * xt;
    default: return xt;
  }
}

/// tail_part for every entity at once (rows of the returned table).
inline Table all_tail_parts(const ModelParams& p, Index r) {
  switch (p.family) {
    case ModelFamily::SE: return p.entities * p.tail_map(r).transpose();
    case ModelFamily::TransR: return p.entities * p.head_map(r).transpose();
    default: return p.entities;
  }
}

/// g = dL/d head_part(h, r).
inline void backprop_head(const ModelParams& p, ModelParams& grad, Index h, Index r, const Vector& g) {
  const auto xh = p.entities.row(h).transpose();
  switch (p.family) {
    case ModelFamily::SE:
      grad.entities.row(h) += (p.head_map(r).transpose() * g).transpose();
      grad.head_map(r) += g * xh.transpose();
      break;
    case ModelFamily::TransE:
      grad.entities.row(h) += g.transpose();
      grad.translations.row(r) += g.transpose();
      break;
    case ModelFamily::TransR:
      grad.entities.row(h) += (p.head_map(r).transpose() * g).transpose();
      grad.head_map(r) += g * xh.transpose();
      grad.translations.row(r) += g.transpose();
      break;
    case ModelFamily::RotatE:
      for (Index k = 0; k < p.dim / 2; ++k) {
        const double th = p.phases(r, k);
        const Eigen::Vector2d gk = g.segment<2>(2 * k);
        const Eigen::Vector2d xk = xh.segment<2>(2 * k);
        grad.entities.row(h).segment<2>(2 * k) += (rotation2(th).transpose() * gk).transpose();
        Eigen::Matrix2d drot;
        drot << -std::sin(th), -std::cos(th), std::cos(th), -std::sin(th);
        grad.phases(r, k) += gk.dot(drot * xk);
      }
      break;
  }
}

/// g = dL/d tail_part(r, t).
inline void backprop_tail(const ModelParams& p, ModelParams& grad, Index r, Index t, const Vector& g) {
  const auto xt = p.entities.row(t).transpose();
  switch (p.family) {
    case ModelFamily::SE:
      grad.entities.row(t) += (p.tail_map(r).transpose() * g).transpose();
      grad.tail_map(r) += g * xt.transpose();
      break;
    case ModelFamily::TransR:
      grad.entities.row(t) += (p.head_map(r).transpose() * g).transpose();
      grad.head_map(r) += g * xt.transpose();
      break;
    default:
      grad.entities.row(t) += g.transpose();
      break;
  }
}

/// Energy |v|^p and its gradient with respect to v.
inline double energy_of(const Vector& v, int p, Vector* dv) {
  const double sq = v.squaredNorm();
  if (p == 2) {
    if (dv) *dv = 2.0 * v;
    return sq;
  }
  const double n = std::sqrt(sq);
  if (dv) *dv = n > 0.0 ? Vector(v / n) : Vector(Vector::Zero(v.size()));
  return n;
}

/// Adds dL/df * df/dparams for one triple and returns f.
inline double accumulate_triple(const ModelParams& p, ModelParams& grad, const Triple& t, double dl_df, int exponent) {
  const Vector v = head_part(p, t.head, t.relation) - tail_part(p, t.relation, t.tail);
  Vector dv;
  const double f = energy_of(v, exponent, &dv);
  if (dl_df != 0.0) {
    const Vector g = dl_df * dv;
    backprop_head(p, grad, t.head, t.relation, g);
    backprop_tail(p, grad, t.relation, t.tail, -g);
  }
  return f;
}

inline double triple_energy(const ModelParams& p, const Triple& t, int exponent) {
  const Vector v = head_part(p, t.head, t.relation) - tail_part(p, t.relation, t.tail);
  return energy_of(v, exponent, nullptr);
}

}  // namespace detail

struct LossAndGrad {
  double loss = 0.0;
  ModelParams grad;
};

/// Total batch loss and analytic gradients.
///
/// Energies f are "lower is better"; each loss treats -f as the logit.
///   bce           softplus(f) per positive, softplus(-f) per negative
///   margin        max(0, f(pos) + margin - f(neg)) per (positive, negative) pair
///   crossentropy  -log softmax_t(-f(h, r, .)) over every entity as tail; negatives unused
///   nssa          -log s(margin - f(pos)) - sum_i w_i log s(f(neg_i) - margin), with
///                 w = softmax(temperature * (margin - f(neg))) held constant
inline LossAndGrad loss_and_grad(const ModelParams& params, const std::vector<Triple>& positives,
                                 const std::vector<Triple>& negatives, const TrainConfig& cfg) {
  using namespace detail;
  LossAndGrad out{0.0, params.zeros_like()};
  const int ex = cfg.score_exponent;
  const Index n_pos = static_cast<Index>(positives.size());
  const Index n_neg = n_pos == 0 ? 0 : static_cast<Index>(negatives.size()) / n_pos;
  if (cfg.loss == LossKind::margin || cfg.loss == LossKind::nssa) {
    if (n_neg < 1 || static_cast<Index>(negatives.size()) != n_neg * n_pos)
      throw ContractError(to_string(cfg.loss) + " loss needs the same positive number of negatives per positive");
  }
  if (cfg.loss == LossKind::bce && n_pos > 0 && static_cast<Index>(negatives.size()) != n_neg * n_pos)
    throw ContractError("bce loss needs the same number of negatives per positive");

  auto neg_of = [&](Index i, Index j) -> const Triple& {
    return negatives[static_cast<std::size_t>(i * n_neg + j)];
  };

  switch (cfg.loss) {
    case LossKind::bce: {
      for (Index i = 0; i < n_pos; ++i) {
        const Triple& pos = positives[static_cast<std::size_t>(i)];
        const double f = triple_energy(params, pos, ex);
        out.loss += softplus(f);
        accumulate_triple(params, out.grad, pos, sigmoid(f), ex);
        for (Index j = 0; j < n_neg; ++j) {
          const double fn = triple_energy(params, neg_of(i, j), ex);
          out.loss += softplus(-fn);
          accumulate_triple(params, out.grad, neg_of(i, j), -sigmoid(-fn), ex);
        }
      }
      break;
    }
    case LossKind::margin: {
      for (Index i = 0; i < n_pos; ++i) {
        const Triple& pos = positives[static_cast<std::size_t>(i)];
        const double f = triple_energy(params, pos, ex);
        double pos_weight = 0.0;
        for (Index j = 0; j < n_neg; ++j) {
          const double fn = triple_energy(params, neg_of(i, j), ex);
          const double l = f + cfg.margin - fn;
          if (l > 0.0) {
            out.loss += l;
            pos_weight += 1.0;
            accumulate_triple(params, out.grad, neg_of(i, j), -1.0, ex);
          }
        }
        if (pos_weight > 0.0) accumulate_triple(params, out.grad, pos, pos_weight, ex);
      }
      break;
    }
    case LossKind::crossentropy: {
      std::map<Index, Table> tails_by_relation;
      const Index n_ent = params.num_entities();
      for (const auto& pos : positives) {
        auto it = tails_by_relation.find(pos.relation);
        if (it == tails_by_relation.end())
          it = tails_by_relation.emplace(pos.relation, all_tail_parts(params, pos.relation)).first;
        const Table& tails = it->second;
        const Vector a = head_part(params, pos.head, pos.relation);
        Vector f(n_ent);
        std::vector<Vector> dvs(static_cast<std::size_t>(n_ent));
        for (Index j = 0; j < n_ent; ++j) {
          const Vector v = a - tails.row(j).transpose();
          f(j) = energy_of(v, ex, &dvs[static_cast<std::size_t>(j)]);
        }
        const double fmin = f.minCoeff();
        const Vector w = (-(f.array() - fmin)).exp().matrix();
        const double z = w.sum();
        out.loss += f(pos.tail) - fmin + std::log(z);
        Vector ga = Vector::Zero(params.dim);
        for (Index j = 0; j < n_ent; ++j) {
          const double dl_df = (j == pos.tail ? 1.0 : 0.0) - w(j) / z;
          if (dl_df == 0.0) continue;
          const Vector g = dl_df * dvs[static_cast<std::size_t>(j)];
          ga += g;
          backprop_tail(params, out.grad, pos.relation, j, -g);
        }
        backprop_head(params, out.grad, pos.head, pos.relation, ga);
      }
      break;
    }
    case LossKind::nssa: {
      Vector fn(n_neg);
      for (Index i = 0; i < n_pos; ++i) {
        const Triple& pos = positives[static_cast<std::size_t>(i)];
        const double f = triple_energy(params, pos, ex);
        out.loss -= log_sigmoid(cfg.margin - f);
        accumulate_triple(params, out.grad, pos, sigmoid(f - cfg.margin), ex);
        for (Index j = 0; j < n_neg; ++j) fn(j) = triple_energy(params, neg_of(i, j), ex);
        const Vector logits = cfg.adversarial_temperature * (cfg.margin - fn.array()).matrix();
        const Vector w = (logits.array() - logits.maxCoeff()).exp().matrix();
        const Vector weights = w / w.sum();
        for (Index j = 0; j < n_neg; ++j) {
          out.loss -= weights(j) * log_sigmoid(fn(j) - cfg.margin);
          accumulate_triple(params, out.grad, neg_of(i, j), -weights(j) * sigmoid(cfg.margin - fn(j)), ex);
        }
      }
      break;
    }
  }

  if (!std::isfinite(out.loss) || !out.grad.all_finite()) {
    std::ostringstream msg;
    msg << "non-finite " << to_string(cfg.loss) << " loss (" << out.loss << ") on a batch of " << n_pos
        << " positives / " << negatives.size() << " negatives; max |entity| = " << params.entities.cwiseAbs().maxCoeff();
    throw NumericError(msg.str());
  }
  return out;
}

}  // namespace kgsheaf
