// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/model.hpp"

#include <cmath>

namespace kgsheaf {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ModelParams m;
  ModelParams v;
  long step = 0;

  static AdamState for_params(const ModelParams& p) { return {p.zeros_like(), p.zeros_like(), 0}; }
};

/// One bias-corrected Adam update, no weight decay. RotatE phases are
/// wrapped back into (-pi, pi] afterwards.
inline void adam_step(AdamState& state, ModelParams& params, const ModelParams& grad, double lr,
                      const AdamOptions& opt = {}) {
  ++state.step;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.step));
  auto ps = params.tensors();
  auto gs = grad.tensors();
  auto ms = state.m.tensors();
  auto vs = state.v.tensors();
  if (ps.size() != gs.size() || ps.size() != ms.size() || ps.size() != vs.size())
    throw DimensionError("adam: parameter and gradient layouts differ");
  for (std::size_t k = 0; k < ps.size(); ++k) {
    Table& x = *ps[k].second;
    const Table& g = *gs[k].second;
    Table& m = *ms[k].second;
    Table& v = *vs[k].second;
    if (x.rows() != g.rows() || x.cols() != g.cols()) throw DimensionError("adam: shape mismatch in " + ps[k].first);
    m = opt.beta1 * m + (1.0 - opt.beta1) * g;
    v = opt.beta2 * v + (1.0 - opt.beta2) * g.cwiseProduct(g);
    x.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + opt.eps);
  }
  if (params.family == ModelFamily::RotatE)
    params.phases = params.phases.unaryExpr([](double t) { return wrap_phase(t); });
}

}  // namespace kgsheaf
