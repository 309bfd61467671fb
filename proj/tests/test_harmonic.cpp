// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <sstream>

using namespace kgsheaf;
using namespace kgsheaf::testing;

namespace {

struct Fixture {
  Index n = 0, d = 0;
  std::vector<Triple> edges;
  RelationSet reps;
  SheafSystem sys;
  std::vector<Index> boundary, interior;
  Table xb;
};

Fixture make_fixture(Rng& rng, RepKind kind, Index n, Index d, Index nb, Index extra) {
  Fixture f;
  f.n = n;
  f.d = d;
  f.edges = random_connected_edges(n, extra, 3, rng);
  f.reps = random_reps(kind, 3, d, rng);
  f.sys = build_sheaf_system(Coboundary(n, f.edges, f.reps));
  std::tie(f.boundary, f.interior) = random_partition(n, nb, rng);
  f.xb = random_table(nb, d, rng);
  return f;
}

ExtensionProblem problem_for(const Fixture& f, ExtensionOptions o = {}, Table init = {}) {
  ExtensionProblem p;
  p.system = &f.sys;
  p.boundary = f.boundary;
  p.interior = f.interior;
  p.x_boundary = f.xb;
  p.x_interior_init = init.size() ? init : Table::Zero(static_cast<Index>(f.interior.size()), f.d);
  p.options = o;
  return p;
}

/// Minimises |delta x - r|^2 over the interior rows with plain gradient
/// descent (step 1/L) on the dense coboundary.
Vector gradient_descent_oracle(const Fixture& f, int steps) {
  const Matrix delta = dense_coboundary(f.n, f.edges, f.reps);
  const Vector r = stacked_translations(f.edges, f.reps);
  const Matrix du = node_columns(delta, f.interior, f.d), db = node_columns(delta, f.boundary, f.d);
  const Vector rhs = r - db * flatten(f.xb);
  const Matrix h = 2.0 * du.transpose() * du;
  const double lip = Eigen::SelfAdjointEigenSolver<Matrix>(h).eigenvalues().maxCoeff();
  Vector x = Vector::Zero(du.cols());
  for (int k = 0; k < steps; ++k) x -= (1.0 / lip) * (2.0 * du.transpose() * (du * x - rhs));
  return x;
}

double interior_min_eigenvalue(const Fixture& f, Frame fr = Frame::normalized) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(submatrix(f.sys.op(fr), f.interior, f.interior).to_dense())
      .eigenvalues()
      .minCoeff();
}

Vector interior_rows(const Table& x, const std::vector<Index>& ids) { return flatten(rows_of(x, ids)); }

SheafSystem path_system() {
  Rng rng(0);
  return build_sheaf_system(Coboundary(3, {{0, 0, 1}, {1, 0, 2}}, random_reps(RepKind::trivial, 1, 1, rng)));
}

}  // namespace

TEST(TranslationRhs, ZeroWithoutTranslations) {
  Rng rng(1);
  const auto f = make_fixture(rng, RepKind::SE, 6, 2, 2, 3);
  EXPECT_EQ(translation_rhs(f.sys).cwiseAbs().maxCoeff(), 0.0);
}

TEST(TranslationRhs, SingleTransEEdge) {
  RelationSet reps(1);
  reps[0] = {Matrix::Identity(1, 1), Matrix::Identity(1, 1), Vector::Ones(1)};
  const auto sys = build_sheaf_system(Coboundary(2, {{0, 0, 1}}, reps));
  Vector expected(2);
  expected << -1, 1;
  EXPECT_EQ(translation_rhs(sys, Frame::raw), expected);
}

TEST(TranslationRhs, MatchesDenseTranspose) {
  Rng rng(2);
  const auto f = make_fixture(rng, RepKind::general, 9, 3, 3, 6);
  const Matrix delta = dense_coboundary(f.n, f.edges, f.reps);
  const Vector r = stacked_translations(f.edges, f.reps);
  EXPECT_LT((translation_rhs(f.sys, Frame::raw) - delta.transpose() * r).cwiseAbs().maxCoeff(), 1e-12);
  Matrix s = Matrix::Zero(f.n * f.d, f.n * f.d);
  for (Index i = 0; i < f.n; ++i) s.block(i * f.d, i * f.d, f.d, f.d) = f.sys.scale[static_cast<std::size_t>(i)];
  EXPECT_LT((translation_rhs(f.sys) - s * delta.transpose() * r).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ClosedForm, EmptyInteriorReturnsBoundary) {
  Rng rng(3);
  auto f = make_fixture(rng, RepKind::SE, 5, 2, 5, 2);
  const Table x = extend_closed_form(problem_for(f));
  EXPECT_TRUE(rows_of(x, f.boundary) == f.xb);
}

TEST(ClosedForm, PathMidpoint) {
  const auto sys = path_system();
  for (Frame fr : {Frame::normalized, Frame::raw}) {
    ExtensionProblem p;
    p.system = &sys;
    p.boundary = {0, 2};
    p.interior = {1};
    p.x_boundary = Table(2, 1);
    p.x_boundary << 0, 1;
    p.x_interior_init = Table::Zero(1, 1);
    p.options.frame = fr;
    EXPECT_NEAR(extend_closed_form(p)(1, 0), 0.5, 1e-15);
  }
}

TEST(ClosedForm, MatchesGradientDescentOracle) {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    auto f = make_fixture(rng, RepKind::SE, 6, 2, 2, 3);
    f.reps = conditioned_reps(3, 2, trial % 2 == 1, rng);
    f.sys = build_sheaf_system(Coboundary(f.n, f.edges, f.reps));
    const Vector xu = interior_rows(extend_closed_form(problem_for(f)), f.interior);
    EXPECT_LT((xu - gradient_descent_oracle(f, 10000)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(ClosedForm, TrivialSheafClassicalSolution) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = make_fixture(rng, RepKind::trivial, 10, 1, 3, 6);
    const Matrix L = f.sys.laplacian.to_dense();
    const Vector xb = flatten(f.xb);
    const Vector classical = -node_block(L, f.interior, f.interior, 1).lu().solve(node_block(L, f.interior, f.boundary, 1) * xb);
    const Table x = extend_closed_form(problem_for(f));
    EXPECT_LT((interior_rows(x, f.interior) - classical).cwiseAbs().maxCoeff(), 1e-10);
    // The same solution read in rescaled coordinates y = D^{1/2} x solves
    // Delta[U,U] y_U = -Delta[U,B] y_B.
    const Matrix N = f.sys.normalized.to_dense();
    const Vector yb = f.sys.to_scaled(xb, f.boundary);
    const Vector yu = f.sys.to_scaled(interior_rows(x, f.interior), f.interior);
    const Vector eq1 = -node_block(N, f.interior, f.interior, 1).lu().solve(node_block(N, f.interior, f.boundary, 1) * yb);
    EXPECT_LT((yu - eq1).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ClosedForm, StationarityOptimalityAndBoundaryImmutability) {
  Rng rng(6);
  for (auto kind : {RepKind::SE, RepKind::TransE, RepKind::TransR, RepKind::general}) {
    const auto f = make_fixture(rng, kind, 8, 2, 3, 5);
    const Table x = extend_closed_form(problem_for(f));
    EXPECT_TRUE(rows_of(x, f.boundary) == f.xb);
    const Vector y = f.sys.to_scaled(flatten(x));
    const Vector res = gather(f.sys.normalized.apply(y) - translation_rhs(f.sys), f.interior, f.d);
    EXPECT_LT(res.cwiseAbs().maxCoeff(), 1e-8);
    const auto g = graph_from_edges(f.n, 3, f.edges);
    const double e0 = energy(x, g, f.reps);
    for (int k = 0; k < 100; ++k) {
      Table xp = x;
      for (Index u : f.interior) xp.row(u) += 0.01 * random_table(1, f.d, rng);
      EXPECT_LE(e0, energy(xp, g, f.reps) + 1e-12);
    }
  }
}

TEST(ClosedForm, RawAndNormalizedFramesAgree) {
  Rng rng(7);
  const auto f = make_fixture(rng, RepKind::general, 7, 3, 3, 4);
  ExtensionOptions raw;
  raw.frame = Frame::raw;
  const Table a = extend_closed_form(problem_for(f)), b = extend_closed_form(problem_for(f, raw));
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ClosedForm, SizeGuard) {
  Rng rng(8);
  const auto f = make_fixture(rng, RepKind::SE, 6, 2, 2, 3);
  ExtensionOptions o;
  o.dense_limit = 4;
  EXPECT_THROW(extend_closed_form(problem_for(f, o)), NumericError);
}

TEST(ClosedForm, InvalidProblems) {
  Rng rng(9);
  const auto f = make_fixture(rng, RepKind::SE, 6, 2, 2, 3);
  auto p = problem_for(f);
  p.interior.push_back(p.boundary.front());
  EXPECT_THROW(extend_closed_form(p), ContractError);
  p = problem_for(f);
  p.interior.pop_back();
  EXPECT_THROW(extend_closed_form(p), ContractError);
  ExtensionOptions o;
  o.alpha = 1.5;
  EXPECT_THROW(extend_iterative(problem_for(f, o)), ContractError);
}

TEST(Iterative, ZeroIterationsReturnsInitialization) {
  Rng rng(10);
  const auto f = make_fixture(rng, RepKind::SE, 6, 2, 2, 3);
  ExtensionOptions o;
  o.max_iters = 0;
  const Table init = random_table(4, 2, rng);
  const auto res = extend_iterative(problem_for(f, o, init));
  EXPECT_LT((rows_of(res.x, f.interior) - init).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(res.iterations, 0);
  EXPECT_EQ(res.trace.size(), 1u);
}

TEST(Iterative, PathConvergesWithin200Steps) {
  const auto sys = path_system();
  ExtensionProblem p;
  p.system = &sys;
  p.boundary = {0, 2};
  p.interior = {1};
  p.x_boundary = Table(2, 1);
  p.x_boundary << 0, 1;
  p.x_interior_init = Table::Constant(1, 1, 7.0);
  p.options.alpha = 0.5;
  p.options.max_iters = 200;
  const auto res = extend_iterative(p);
  EXPECT_NEAR(res.x(1, 0), 0.5, 1e-6);
}

TEST(Iterative, GeometricConvergenceToClosedForm) {
  Rng rng(11);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = make_fixture(rng, RepKind::SE, 7, 2, 3, 4);
    const double lmin = interior_min_eigenvalue(f);
    if (lmin < 1e-3) continue;
    ++checked;
    const Vector target = interior_rows(extend_closed_form(problem_for(f)), f.interior);
    ExtensionOptions o;
    o.alpha = 0.5;
    o.max_iters = 20000;
    o.tol = 1e-12;
    const auto res = extend_iterative(problem_for(f, o, random_table(4, 2, rng)));
    EXPECT_TRUE(res.converged);
    EXPECT_LT((interior_rows(res.x, f.interior) - target).cwiseAbs().maxCoeff(), 1e-6);
    // |g_k|_inf <= rho^k sqrt(m) |g_0|_inf with rho the contraction factor.
    const Matrix a = submatrix(f.sys.normalized, f.interior, f.interior).to_dense();
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues();
    const double rho = std::max(std::abs(1 - o.alpha * ev.minCoeff()), std::abs(1 - o.alpha * ev.maxCoeff()));
    const double bound0 = std::sqrt(static_cast<double>(a.rows())) * res.trace.front().residual;
    for (const auto& rec : res.trace)
      EXPECT_LE(rec.residual, bound0 * std::pow(rho, static_cast<double>(rec.iter)) + 1e-13);
  }
  EXPECT_GT(checked, 3);
}

TEST(Iterative, InitializationIndependence) {
  Rng rng(12);
  auto f = make_fixture(rng, RepKind::TransE, 8, 2, 3, 6);
  ASSERT_GT(interior_min_eigenvalue(f), 1e-3);
  ExtensionOptions o;
  o.alpha = 0.5;
  o.max_iters = 5000;
  const auto a = extend_iterative(problem_for(f, o, init_unknown(5, 2, InitDistribution::normal, 1)));
  const auto b = extend_iterative(problem_for(f, o, init_unknown(5, 2, InitDistribution::normal, 2)));
  EXPECT_LT((a.x - b.x).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Iterative, BoundaryRowsBitwiseAndEnergyMonotone) {
  Rng rng(13);
  for (auto kind : {RepKind::SE, RepKind::TransE, RepKind::general}) {
    for (double alpha : {0.1, 0.5, 1.0}) {
      const auto f = make_fixture(rng, kind, 9, 2, 3, 6);
      ExtensionOptions o;
      o.alpha = alpha;
      o.max_iters = 300;
      const auto res = extend_iterative(problem_for(f, o, random_table(6, 2, rng)));
      EXPECT_TRUE(rows_of(res.x, f.boundary) == f.xb);
      for (std::size_t k = 1; k < res.trace.size(); ++k)
        EXPECT_LE(res.trace[k].energy, res.trace[k - 1].energy * (1 + 1e-12) + 1e-12);
    }
  }
}

TEST(Iterative, RawFrameValidatesStepSize) {
  Rng rng(14);
  auto f = make_fixture(rng, RepKind::general, 6, 2, 2, 4);
  ExtensionOptions o;
  o.frame = Frame::raw;
  o.alpha = 1.0;
  const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(
                          submatrix(f.sys.laplacian, f.interior, f.interior).to_dense())
                          .eigenvalues()
                          .maxCoeff();
  if (lmax > 2.0) {
    EXPECT_THROW(extend_iterative(problem_for(f, o)), ContractError);
  }
  o.alpha = 1.0 / lmax;
  o.max_iters = 50000;
  o.tol = 1e-11;
  const auto res = extend_iterative(problem_for(f, o));
  EXPECT_LT((res.x - extend_closed_form(problem_for(f, o))).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Iterative, DivergenceIsReported) {
  Rng rng(15);
  auto f = make_fixture(rng, RepKind::SE, 6, 2, 2, 3);
  BlockSparseSymmetric inflated(f.n, f.d);
  for (const auto& [key, b] : f.sys.normalized.blocks()) inflated.add_block(key.first, key.second, 5.0 * b);
  f.sys.normalized = inflated;
  ExtensionOptions o;
  o.alpha = 1.0;
  o.max_iters = 1000;
  EXPECT_THROW(extend_iterative(problem_for(f, o, random_table(4, 2, rng))), NumericError);
}

TEST(InitUnknown, ZerosAndDeterminism) {
  EXPECT_EQ(init_unknown(3, 4, InitDistribution::zeros, 1).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(init_unknown(3, 4, InitDistribution::normal, 5) == init_unknown(3, 4, InitDistribution::normal, 5));
  EXPECT_FALSE(init_unknown(3, 4, InitDistribution::normal, 5) == init_unknown(3, 4, InitDistribution::normal, 6));
}

TEST(Diagnostics, CsvHeaderAndRows) {
  std::ostringstream out;
  write_diagnostics_csv(out, {{0, 1.5, 2.0}, {1, 0.5, 1.0}});
  EXPECT_EQ(out.str(), "iter,residual,energy\n0,1.5,2\n1,0.5,1\n");
}
