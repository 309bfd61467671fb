// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#include "support.hpp"

#include <gtest/gtest.h>

#include <complex>
#include <filesystem>
#include <numbers>
#include <unistd.h>

using namespace kgsheaf;
using namespace kgsheaf::testing;

namespace {

ModelParams two_dim(ModelFamily f) {
  ModelParams p = init_params(f, 2, 2, 1, 0);
  return p;
}

}  // namespace

TEST(Score, TransEExactTranslation) {
  auto p = two_dim(ModelFamily::TransE);
  p.entities << 1, 0, 1, 1;
  p.translations << 0, 1;
  EXPECT_EQ(score_triple(p, 0, 0, 1), 0.0);
}

TEST(Score, StructuredEmbeddingIdentityMaps) {
  auto p = two_dim(ModelFamily::SE);
  p.entities << 1, 0, 0, 1;
  p.head_maps.setIdentity();
  p.tail_maps.setIdentity();
  EXPECT_DOUBLE_EQ(score_triple(p, 0, 0, 1), 2.0);
  EXPECT_DOUBLE_EQ(score_triple(p, 0, 0, 1, 1), std::sqrt(2.0));
}

TEST(Score, RotatEQuarterTurn) {
  auto p = two_dim(ModelFamily::RotatE);
  p.entities << 1, 0, 0, 1;
  p.phases << std::numbers::pi / 2;
  EXPECT_NEAR(score_triple(p, 0, 0, 1), 0.0, 1e-30);
}

TEST(Score, NonNegativeAndZeroOnlyAtAgreement) {
  Rng rng(3);
  for (auto f : {ModelFamily::SE, ModelFamily::TransE, ModelFamily::TransR, ModelFamily::RotatE}) {
    auto p = init_params(f, 4, 6, 2, 5);
    for (int k = 0; k < 50; ++k) {
      const Index h = uniform_index(rng, 0, 5), t = uniform_index(rng, 0, 5), r = uniform_index(rng, 0, 1);
      EXPECT_GE(score_triple(p, h, r, t), 0.0);
    }
  }
}

TEST(InitParams, DeterministicPerSeed) {
  for (auto f : {ModelFamily::SE, ModelFamily::TransE, ModelFamily::TransR, ModelFamily::RotatE}) {
    const auto a = init_params(f, 4, 10, 3, 42), b = init_params(f, 4, 10, 3, 42);
    const auto ta = a.tensors(), tb = b.tensors();
    ASSERT_EQ(ta.size(), tb.size());
    for (std::size_t k = 0; k < ta.size(); ++k) EXPECT_TRUE(*ta[k].second == *tb[k].second);
  }
}

TEST(InitParams, StructuredEmbeddingMapsNearIdentity) {
  const auto p = init_params(ModelFamily::SE, 2, 3, 1, 0);
  ASSERT_EQ(p.head_maps.rows(), 2);
  ASSERT_EQ(p.tail_maps.rows(), 2);
  EXPECT_LT((Matrix(p.head_maps) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.5);
  EXPECT_LT((Matrix(p.tail_maps) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.5);
}

TEST(InitParams, EntityNormsConcentrate) {
  const auto p = init_params(ModelFamily::TransE, 64, 1000, 1, 1);
  const double mean_sq = p.entities.rowwise().squaredNorm().mean();
  EXPECT_GE(mean_sq, 0.8);
  EXPECT_LE(mean_sq, 1.2);
}

TEST(InitParams, RotatERequiresEvenDimension) {
  EXPECT_THROW(init_params(ModelFamily::RotatE, 3, 2, 1, 0), DimensionError);
  EXPECT_THROW(init_params(ModelFamily::TransE, 0, 2, 1, 0), DimensionError);
}

TEST(SheafForm, TransE) {
  auto p = two_dim(ModelFamily::TransE);
  p.translations << 0, 1;
  const auto reps = to_sheaf_form(p);
  EXPECT_TRUE(reps[0].head == Matrix::Identity(2, 2));
  EXPECT_TRUE(reps[0].tail == Matrix::Identity(2, 2));
  EXPECT_TRUE(reps[0].translation == Vector::Unit(2, 1));
}

TEST(SheafForm, RotatEZeroAndQuarterTurn) {
  auto p = two_dim(ModelFamily::RotatE);
  p.phases << 0.0;
  EXPECT_TRUE(to_sheaf_form(p)[0].head == Matrix::Identity(2, 2));
  p.phases << std::numbers::pi / 2;
  const Matrix h = to_sheaf_form(p)[0].head;
  EXPECT_NEAR(h(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(h(0, 1), -1.0, 1e-15);
  EXPECT_NEAR(h(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(h(1, 1), 0.0, 1e-15);
}

TEST(SheafForm, RotatEMatchesComplexArithmetic) {
  Rng rng(5);
  const Index d = 6;
  auto p = init_params(ModelFamily::RotatE, d, 20, 4, 9);
  for (Index i = 0; i < p.phases.size(); ++i) p.phases.data()[i] = std::uniform_real_distribution<double>(-3, 3)(rng);
  const auto reps = to_sheaf_form(p);
  for (int k = 0; k < 100; ++k) {
    const Index h = uniform_index(rng, 0, 19), t = uniform_index(rng, 0, 19), r = uniform_index(rng, 0, 3);
    double oracle = 0.0;
    for (Index j = 0; j < d / 2; ++j) {
      const std::complex<double> xh(p.entities(h, 2 * j), p.entities(h, 2 * j + 1));
      const std::complex<double> xt(p.entities(t, 2 * j), p.entities(t, 2 * j + 1));
      oracle += std::norm(std::polar(1.0, p.phases(r, j)) * xh - xt);
    }
    EXPECT_NEAR(sheaf_score(reps, p.entities, h, r, t), oracle, 1e-9);
  }
  for (const auto& rep : reps)
    EXPECT_LT((rep.head.transpose() * rep.head - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SheafForm, ScoreEquivalenceAllFamilies) {
  Rng rng(8);
  for (auto f : {ModelFamily::SE, ModelFamily::TransE, ModelFamily::TransR, ModelFamily::RotatE}) {
    const auto p = init_params(f, 4, 12, 3, 2);
    const auto reps = to_sheaf_form(p);
    for (int k = 0; k < 50; ++k) {
      const Index h = uniform_index(rng, 0, 11), t = uniform_index(rng, 0, 11), r = uniform_index(rng, 0, 2);
      for (int ex : {1, 2})
        EXPECT_NEAR(sheaf_score(reps, p.entities, h, r, t, ex), score_triple(p, h, r, t, ex), 1e-9) << to_string(f);
    }
  }
}

// ---- negative sampling -----------------------------------------------------

TEST(Negatives, TwoEntitiesForcesTheOther) {
  const std::vector<Triple> batch{{0, 0, 1}, {1, 0, 0}};
  const auto negs = sample_negatives(batch, 2, 3, CorruptionMode::corrupt_tail, 1);
  ASSERT_EQ(negs.size(), 6u);
  for (std::size_t i = 0; i < negs.size(); ++i) {
    const auto& pos = batch[i / 3];
    EXPECT_EQ(negs[i].head, pos.head);
    EXPECT_EQ(negs[i].tail, 1 - pos.tail);
  }
}

TEST(Negatives, DeterministicPerSeed) {
  const std::vector<Triple> batch{{0, 0, 1}, {2, 1, 3}, {4, 0, 5}};
  EXPECT_EQ(sample_negatives(batch, 50, 4, CorruptionMode::corrupt_both, 17),
            sample_negatives(batch, 50, 4, CorruptionMode::corrupt_both, 17));
}

TEST(Negatives, CorruptBothChangesExactlyOneSide) {
  const std::vector<Triple> batch{{0, 0, 1}};
  const auto negs = sample_negatives(batch, 10, 200, CorruptionMode::corrupt_both, 3);
  int heads = 0;
  for (const auto& n : negs) {
    EXPECT_TRUE((n.head != 0) != (n.tail != 1));
    heads += n.head != 0;
  }
  EXPECT_GT(heads, 50);
  EXPECT_LT(heads, 150);
}

TEST(Negatives, UniformFrequencyChiSquared) {
  // 1000 positives with tail 0, n=5, 11 entities: corruptions uniform over
  // the 10 other entities. Critical value chi2(0.999, 9 dof) = 27.88.
  std::vector<Triple> batch(1000, Triple{3, 0, 0});
  const auto negs = sample_negatives(batch, 11, 5, CorruptionMode::corrupt_tail, 123);
  std::vector<double> counts(11, 0.0);
  for (const auto& n : negs) {
    ASSERT_NE(n.tail, 0);
    counts[static_cast<std::size_t>(n.tail)] += 1.0;
  }
  const double expected = 5000.0 / 10.0;
  double chi2 = 0.0;
  for (std::size_t e = 1; e < counts.size(); ++e) chi2 += (counts[e] - expected) * (counts[e] - expected) / expected;
  EXPECT_LT(chi2, 27.88);
}

TEST(Negatives, Preconditions) {
  const std::vector<Triple> batch{{0, 0, 0}};
  EXPECT_THROW(sample_negatives(batch, 1, 1, CorruptionMode::corrupt_tail, 0), ContractError);
  EXPECT_THROW(sample_negatives(batch, 5, 0, CorruptionMode::corrupt_tail, 0), ContractError);
}

// ---- losses ----------------------------------------------------------------

TEST(Loss, MarginSatisfiedIsZero) {
  auto p = two_dim(ModelFamily::TransE);
  p.entities << 0, 0, 0, 0;
  p.translations << 0, 0;
  TrainConfig c;
  c.loss = LossKind::margin;
  c.margin = 1.0;
  // f(pos) = 0; the negative (1, 0, 0) has energy |x1 - x0|^2, set to 2 = margin + 1.
  p.entities << 0, 0, 1, 1;
  const std::vector<Triple> pos{{0, 0, 0}};
  const std::vector<Triple> neg{{0, 0, 1}};
  const auto lg = loss_and_grad(p, pos, neg, c);
  EXPECT_EQ(lg.loss, 0.0);
  for (const auto& [name, t] : lg.grad.tensors()) EXPECT_EQ(t->cwiseAbs().maxCoeff(), 0.0) << name;
}

TEST(Loss, CrossEntropyUniformIsLogTwo) {
  auto p = two_dim(ModelFamily::TransE);
  p.entities << 0.5, -0.2, 0.5, -0.2;
  TrainConfig c;
  c.loss = LossKind::crossentropy;
  const auto lg = loss_and_grad(p, {{0, 0, 1}, {1, 0, 0}}, {}, c);
  EXPECT_NEAR(lg.loss, 2.0 * std::log(2.0), 1e-12);
}

TEST(Loss, MarginAndNssaNeedNegatives) {
  const auto p = init_params(ModelFamily::TransE, 2, 3, 1, 0);
  TrainConfig c;
  c.loss = LossKind::margin;
  EXPECT_THROW(loss_and_grad(p, {{0, 0, 1}}, {}, c), ContractError);
  c.loss = LossKind::nssa;
  EXPECT_THROW(loss_and_grad(p, {{0, 0, 1}}, {}, c), ContractError);
}

TEST(Loss, NonFiniteLossIsNumericError) {
  auto p = init_params(ModelFamily::TransE, 2, 3, 1, 0);
  p.entities(0, 0) = std::numeric_limits<double>::infinity();
  TrainConfig c;
  c.loss = LossKind::bce;
  EXPECT_THROW(loss_and_grad(p, {{0, 0, 1}}, {{0, 0, 2}}, c), NumericError);
}

class GradientCheck : public ::testing::TestWithParam<std::tuple<ModelFamily, LossKind, int>> {};

TEST_P(GradientCheck, MatchesCentralDifferences) {
  const auto [family, loss, exponent] = GetParam();
  Rng rng(1000 + static_cast<int>(family) * 10 + static_cast<int>(loss) + exponent * 100);
  for (int point = 0; point < 10; ++point) {
    const Index d = 4, ne = 7, nr = 3, n_neg = 3;
    auto p = init_params(family, d, ne, nr, rng());
    for (auto& [name, t] : p.tensors())
      for (Index i = 0; i < t->size(); ++i) t->data()[i] += 0.3 * gauss(rng);
    std::vector<Triple> pos;
    for (int k = 0; k < 4; ++k) pos.push_back({uniform_index(rng, 0, ne - 1), uniform_index(rng, 0, nr - 1), uniform_index(rng, 0, ne - 1)});
    const auto neg = sample_negatives(pos, ne, n_neg, CorruptionMode::corrupt_both, rng());
    TrainConfig c;
    c.loss = loss;
    c.score_exponent = exponent;
    c.margin = 2.0;
    c.adversarial_temperature = 0.7;
    const auto lg = loss_and_grad(p, pos, neg, c);
    std::vector<double> weights;
    const double ref = reference_loss(p, pos, neg, c, nullptr, &weights);
    ASSERT_NEAR(lg.loss, ref, 1e-9 * std::max(1.0, std::abs(ref)));

    const double eps = 1e-5;
    auto grad_tensors = lg.grad.tensors();
    auto param_tensors = p.tensors();
    for (std::size_t k = 0; k < param_tensors.size(); ++k) {
      Table& t = *param_tensors[k].second;
      const Table& g = *grad_tensors[k].second;
      for (Index i = 0; i < t.size(); ++i) {
        const double saved = t.data()[i];
        t.data()[i] = saved + eps;
        const double up = reference_loss(p, pos, neg, c, loss == LossKind::nssa ? &weights : nullptr, nullptr);
        t.data()[i] = saved - eps;
        const double down = reference_loss(p, pos, neg, c, loss == LossKind::nssa ? &weights : nullptr, nullptr);
        t.data()[i] = saved;
        const double numeric = (up - down) / (2 * eps);
        const double analytic = g.data()[i];
        const double rel = std::abs(numeric - analytic) / std::max({1.0, std::abs(numeric), std::abs(analytic)});
        EXPECT_LT(rel, 1e-4) << to_string(family) << "/" << to_string(loss) << " p=" << exponent << " "
                             << param_tensors[k].first << "[" << i << "] analytic " << analytic << " numeric "
                             << numeric;
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(
    AllPairs, GradientCheck,
    ::testing::Combine(::testing::Values(ModelFamily::SE, ModelFamily::TransE, ModelFamily::TransR, ModelFamily::RotatE),
                       ::testing::Values(LossKind::bce, LossKind::margin, LossKind::crossentropy, LossKind::nssa),
                       ::testing::Values(1, 2)),
    [](const auto& info) {
      return to_string(std::get<0>(info.param)) + "_" + to_string(std::get<1>(info.param)) + "_p" +
             std::to_string(std::get<2>(info.param));
    });

// ---- Adam ------------------------------------------------------------------

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  auto p = init_params(ModelFamily::TransR, 3, 4, 2, 1);
  const auto before = p;
  auto st = AdamState::for_params(p);
  adam_step(st, p, p.zeros_like(), 0.1);
  for (std::size_t k = 0; k < p.tensors().size(); ++k) EXPECT_TRUE(*p.tensors()[k].second == *before.tensors()[k].second);
}

TEST(Adam, FirstStepIsLrTimesSign) {
  auto p = init_params(ModelFamily::TransE, 3, 2, 1, 1);
  const auto before = p;
  auto g = p.zeros_like();
  g.entities << 0.3, -2.0, 1e-3, -5.0, 7.0, 0.02;
  auto st = AdamState::for_params(p);
  adam_step(st, p, g, 0.01);
  for (Index i = 0; i < p.entities.size(); ++i) {
    const double step = p.entities.data()[i] - before.entities.data()[i];
    EXPECT_NEAR(step, -0.01 * (g.entities.data()[i] > 0 ? 1.0 : -1.0), 1e-7);
  }
}

TEST(Adam, MinimizesSquaredNorm) {
  ModelParams p;
  p.family = ModelFamily::TransE;
  p.dim = 2;
  p.entities = Table::Ones(1, 2);
  p.translations = Table::Zero(1, 2);
  auto st = AdamState::for_params(p);
  for (int k = 0; k < 200; ++k) {
    auto g = p.zeros_like();
    g.entities = 2.0 * p.entities;
    adam_step(st, p, g, 0.1);
  }
  EXPECT_LT(p.entities.norm(), 1e-2);
}

TEST(Adam, RotatEPhasesStayWrapped) {
  auto p = init_params(ModelFamily::RotatE, 2, 2, 1, 0);
  p.phases << std::numbers::pi - 1e-3;
  auto g = p.zeros_like();
  g.phases << -1.0;
  auto st = AdamState::for_params(p);
  adam_step(st, p, g, 0.1);
  EXPECT_GT(p.phases(0, 0), -std::numbers::pi);
  EXPECT_LE(p.phases(0, 0), std::numbers::pi);
  EXPECT_LT(p.phases(0, 0), 0.0);
}

// ---- training --------------------------------------------------------------

TEST(Train, ZeroEpochsReturnsInitialParams) {
  const auto g = load_triples_string("a\tr\tb\nb\tr\tc\n");
  TrainConfig c;
  c.epochs = 0;
  const auto init = init_params(ModelFamily::TransE, 4, 3, 1, c.seed);
  const auto res = train(g, ModelFamily::TransE, 4, c);
  EXPECT_TRUE(res.params.entities == init.entities);
  EXPECT_TRUE(res.epoch_loss.empty());
}

TEST(Train, DeterministicPerSeed) {
  const auto toy = generate_toy_kg({});
  TrainConfig c;
  c.epochs = 5;
  c.loss = LossKind::nssa;
  c.seed = 4;
  const auto a = train(toy.graph, ModelFamily::RotatE, 4, c), b = train(toy.graph, ModelFamily::RotatE, 4, c);
  EXPECT_TRUE(a.params.entities == b.params.entities);
  EXPECT_TRUE(a.params.phases == b.params.phases);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
}

TEST(Train, EmptyGraphIsRejected) {
  KnowledgeGraph g;
  EXPECT_THROW(train(g, ModelFamily::TransE, 2, TrainConfig{}), ContractError);
}

TEST(Train, NoiseFreeToyReachesLowEnergy) {
  ToyOptions o;
  o.noise = 0.0;
  const auto toy = generate_toy_kg(o);
  TrainConfig c;
  c.epochs = 200;
  c.lr = 0.01;
  c.batch_size = 32;
  // Softmax-style losses only rank energies; bce pulls positives toward 0.
  c.loss = LossKind::bce;
  c.num_negs_per_pos = 1;
  const auto res = train(toy.graph, ModelFamily::TransE, 8, c);
  double mean = 0.0;
  for (const auto& t : toy.graph.triples()) mean += score_triple(res.params, t.head, t.relation, t.tail);
  mean /= static_cast<double>(toy.graph.num_triples());
  EXPECT_LT(mean, 0.05);
  EXPECT_LT(res.epoch_loss.back(), res.epoch_loss.front());
}

TEST(Checkpoint, RoundTripIsBitwise) {
  const auto dir = std::filesystem::temp_directory_path() / ("kgsheaf_ck_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  for (auto f : {ModelFamily::SE, ModelFamily::TransE, ModelFamily::TransR, ModelFamily::RotatE}) {
    Checkpoint ck;
    ck.params = init_params(f, 4, 3, 2, 7);
    for (const char* e : {"a", "b", "c"}) ck.entities.add(e);
    for (const char* r : {"p", "q"}) ck.relations.add(r);
    const auto path = save_checkpoint(dir, ck);
    const auto back = load_checkpoint(path);
    EXPECT_EQ(back.params.family, f);
    ASSERT_EQ(back.params.tensors().size(), ck.params.tensors().size());
    for (std::size_t k = 0; k < ck.params.tensors().size(); ++k)
      EXPECT_TRUE(*back.params.tensors()[k].second == *ck.params.tensors()[k].second);
    EXPECT_EQ(back.entities, ck.entities);
    EXPECT_EQ(back.relations, ck.relations);
  }
  // Versions accumulate; the directory root resolves to the newest.
  EXPECT_TRUE(std::filesystem::exists(dir / "v001"));
  EXPECT_TRUE(std::filesystem::exists(dir / "v004"));
  EXPECT_EQ(load_checkpoint(dir).params.family, ModelFamily::RotatE);
  std::filesystem::remove_all(dir);
}
