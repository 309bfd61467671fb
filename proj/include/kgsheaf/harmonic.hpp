// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/linalg.hpp"
#include "kgsheaf/sheaf.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace kgsheaf {

struct ExtensionOptions {
  double alpha = 0.1;
  Index max_iters = 1000;
  /// Stop once the interior gradient max-norm drops to tol (0 disables).
  double tol = 0.0;
  Frame frame = Frame::normalized;
  /// Largest |U| * d accepted by the dense closed-form solve.
  Index dense_limit = 4096;
  double pinv_cutoff = 1e-10;
  /// Consecutive energy increases tolerated before reporting divergence.
  Index divergence_window = 10;
};

/// Boundary values are fixed; interior values are solved for. Tables are in
/// raw (unscaled) coordinates, one row per listed node.
struct ExtensionProblem {
  const SheafSystem* system = nullptr;
  std::vector<Index> boundary;
  std::vector<Index> interior;
  Table x_boundary;
  Table x_interior_init;
  ExtensionOptions options;
};

struct IterationRecord {
  Index iter = 0;
  double residual = 0.0;
  double energy = 0.0;
};

struct ExtensionResult {
  Table x;  // all nodes, raw coordinates
  std::vector<IterationRecord> trace;
  Index iterations = 0;
  bool converged = false;
};

enum class InitDistribution { normal, zeros };

inline InitDistribution parse_init_distribution(std::string_view s) {
  if (s == "normal" || s == "random") return InitDistribution::normal;
  if (s == "zeros") return InitDistribution::zeros;
  throw UsageError("unknown init distribution '" + std::string(s) + "'");
}

inline std::string to_string(InitDistribution d) { return d == InitDistribution::zeros ? "zeros" : "normal"; }

/// Initial interior rows: i.i.d. normal with variance 1/d, or zeros.
inline Table init_unknown(Index count, Index dim, InitDistribution dist, std::uint64_t seed) {
  Table t = Table::Zero(count, dim);
  if (dist == InitDistribution::zeros) return t;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = nd(rng);
  return t;
}

/// delta^T r in the requested frame (S delta^T r when normalized).
inline Vector translation_rhs(const SheafSystem& system, Frame frame = Frame::normalized) {
  return system.coboundary_transpose(frame, system.coboundary.translations());
}

namespace detail {

inline void validate_problem(const ExtensionProblem& p) {
  if (!p.system) throw ContractError("extension problem has no sheaf system");
  const Index n = p.system->nodes();
  const Index d = p.system->dim();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  auto mark = [&](const std::vector<Index>& ids, const char* what) {
    for (Index v : ids) {
      if (v < 0 || v >= n) throw IndexError(std::string(what) + " node id out of range");
      if (seen[static_cast<std::size_t>(v)]) throw ContractError("boundary and interior sets must be disjoint");
      seen[static_cast<std::size_t>(v)] = 1;
    }
  };
  mark(p.boundary, "boundary");
  mark(p.interior, "interior");
  if (static_cast<Index>(p.boundary.size() + p.interior.size()) != n)
    throw ContractError("boundary and interior must cover every node");
  if (p.x_boundary.rows() != static_cast<Index>(p.boundary.size()) || (p.x_boundary.rows() > 0 && p.x_boundary.cols() != d))
    throw DimensionError("boundary table must have one row of width d per boundary node");
  if (!(p.options.alpha > 0.0 && p.options.alpha <= 1.0)) throw ContractError("step size alpha must lie in (0, 1]");
}

inline Vector flat_rows(const Table& t) { return flatten(t); }

inline Table assemble_full(const ExtensionProblem& p, const Vector& x_interior) {
  const Index d = p.system->dim();
  Table x = Table::Zero(p.system->nodes(), d);
  for (std::size_t k = 0; k < p.boundary.size(); ++k) x.row(p.boundary[k]) = p.x_boundary.row(static_cast<Index>(k));
  for (std::size_t k = 0; k < p.interior.size(); ++k)
    x.row(p.interior[k]) = x_interior.segment(static_cast<Index>(k) * d, d).transpose();
  return x;
}

}  // namespace detail

/// Closed-form harmonic extension
///   y_U = op[U,U]^+ ( b_U - op[U,B] y_B ),   b = delta^T r
/// with op = normalized Laplacian (y = D^{1/2} x) or the raw Laplacian.
inline Table extend_closed_form(const ExtensionProblem& p) {
  detail::validate_problem(p);
  const SheafSystem& s = *p.system;
  const Index d = s.dim();
  const Frame f = p.options.frame;
  if (p.interior.empty()) return detail::assemble_full(p, Vector());
  const Index m = static_cast<Index>(p.interior.size()) * d;
  if (m > p.options.dense_limit)
    throw NumericError("closed-form extension needs a dense " + std::to_string(m) + "x" + std::to_string(m) +
                       " solve (limit " + std::to_string(p.options.dense_limit) + "); use the iterative solver");

  const auto& op = s.op(f);
  const Vector xb = detail::flat_rows(p.x_boundary);
  const Vector yb = f == Frame::normalized ? s.to_scaled(xb, p.boundary) : xb;
  const Vector b = gather(translation_rhs(s, f), p.interior, d);
  Vector rhs = b;
  if (!p.boundary.empty()) rhs -= submatrix(op, p.interior, p.boundary).apply(yb);
  const Matrix a = submatrix(op, p.interior, p.interior).to_dense();
  const Vector yu = PsdSolver(a, p.options.pinv_cutoff).solve(rhs);
  const Vector xu = f == Frame::normalized ? s.to_raw(yu, p.interior) : yu;
  if (!xu.allFinite()) throw NumericError("closed-form extension produced non-finite values");
  return detail::assemble_full(p, xu);
}

/// Largest eigenvalue estimate of op[U,U] (power iteration, 5% headroom).
inline double interior_spectral_bound(const SheafSystem& s, const std::vector<Index>& interior, Frame f) {
  auto view = submatrix(s.op(f), interior, interior);
  return 1.05 * power_iteration([&](const Vector& v) { return view.apply(v); }, view.cols());
}

/// Explicit Euler steps on the gradient flow of E with the boundary held
/// fixed:
///   y_U <- y_U - alpha (op[U,U] y_U + op[U,B] y_B - b_U)
/// Trace entry k describes iterate k (entry 0 is the initial state).
inline ExtensionResult extend_iterative(const ExtensionProblem& p) {
  detail::validate_problem(p);
  const SheafSystem& s = *p.system;
  const Index d = s.dim();
  const Index n = s.nodes();
  const Frame f = p.options.frame;
  const double alpha = p.options.alpha;
  if (p.x_interior_init.rows() != static_cast<Index>(p.interior.size()) ||
      (p.x_interior_init.rows() > 0 && p.x_interior_init.cols() != d))
    throw DimensionError("interior initialization must have one row of width d per interior node");

  if (f == Frame::raw && !p.interior.empty()) {
    const double lmax = interior_spectral_bound(s, p.interior, f);
    if (alpha * lmax > 2.0)
      throw ContractError("alpha=" + std::to_string(alpha) + " exceeds the stable step 2/lambda_max=" +
                          std::to_string(2.0 / lmax) + " for the raw Laplacian");
  }

  const auto& op = s.op(f);
  const Vector b = translation_rhs(s, f);
  const Vector r = s.coboundary.translations();

  Vector y = Vector::Zero(n * d);
  const Vector xb = detail::flat_rows(p.x_boundary);
  scatter(y, p.boundary, f == Frame::normalized ? s.to_scaled(xb, p.boundary) : xb, d);
  const Vector xu0 = detail::flat_rows(p.x_interior_init);
  scatter(y, p.interior, f == Frame::normalized ? s.to_scaled(xu0, p.interior) : xu0, d);

  std::vector<Index> all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  const BlockView rows_u = submatrix(op, p.interior, all);
  const Vector b_u = gather(b, p.interior, d);

  ExtensionResult out;
  Vector yu = gather(y, p.interior, d);
  double prev_energy = std::numeric_limits<double>::infinity();
  Index rising = 0;
  for (Index k = 0;; ++k) {
    const Vector g = rows_u.apply(y) - b_u;
    const double residual = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    const double e = (s.coboundary_apply(f, y) - r).squaredNorm();
    if (!std::isfinite(e) || !std::isfinite(residual))
      throw NumericError("iterative extension became non-finite at iteration " + std::to_string(k) +
                         "; try a smaller alpha");
    out.trace.push_back({k, residual, e});
    rising = e > prev_energy * (1.0 + 1e-12) ? rising + 1 : 0;
    if (rising >= p.options.divergence_window)
      throw NumericError("energy increased for " + std::to_string(rising) + " consecutive iterations (alpha=" +
                         std::to_string(alpha) + "); use a smaller alpha");
    prev_energy = e;
    out.iterations = k;
    if (residual <= p.options.tol) {
      out.converged = true;
      break;
    }
    if (k >= p.options.max_iters) break;
    yu -= alpha * g;
    scatter(y, p.interior, yu, d);
  }
  const Vector xu = f == Frame::normalized ? s.to_raw(yu, p.interior) : yu;
  out.x = detail::assemble_full(p, xu);
  return out;
}

inline void write_diagnostics_csv(std::ostream& out, const std::vector<IterationRecord>& trace) {
  out << "iter,residual,energy\n";
  out.precision(17);
  for (const auto& r : trace) out << r.iter << ',' << r.residual << ',' << r.energy << '\n';
}

}  // namespace kgsheaf
