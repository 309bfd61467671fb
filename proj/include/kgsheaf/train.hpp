// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/adam.hpp"
#include "kgsheaf/kg.hpp"
#include "kgsheaf/loss.hpp"
#include "kgsheaf/model.hpp"
#include "kgsheaf/negatives.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace kgsheaf {

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_loss;  // mean loss per positive, one entry per epoch
};

/// Thrown when a batch produces a non-finite loss. Carries the parameters
/// from before the failing batch.
class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, TrainResult last_good)
      : NumericError(what), last_good_(std::move(last_good)) {}
  const TrainResult& last_good() const { return last_good_; }

 private:
  TrainResult last_good_;
};

using EpochCallback = std::function<void(Index epoch, double mean_loss)>;

/// Serial mini-batch training; bitwise reproducible for a fixed config.
inline TrainResult train(const KnowledgeGraph& graph, ModelParams initial, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (graph.num_triples() == 0) throw ContractError("cannot train on an empty graph");
  if (initial.num_entities() != graph.num_entities() || initial.num_relations() < graph.num_relations())
    throw DimensionError("parameter shapes do not match the graph");

  TrainResult result{std::move(initial), {}};
  AdamState adam = AdamState::for_params(result.params);
  std::mt19937_64 rng(cfg.seed ^ 0x5deece66dULL);
  std::vector<std::size_t> order(graph.triples().size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto bs = static_cast<std::size_t>(cfg.batch_size);

  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      std::vector<Triple> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(graph.triples()[order[i]]);
      std::vector<Triple> negs;
      if (cfg.needs_negatives() && cfg.num_negs_per_pos > 0)
        negs = sample_negatives(batch, graph.num_entities(), cfg.num_negs_per_pos, cfg.corruption, rng);
      LossAndGrad lg;
      try {
        lg = loss_and_grad(result.params, batch, negs, cfg);
      } catch (const NumericError& e) {
        throw TrainingAborted(std::string(e.what()) + " (epoch " + std::to_string(epoch + 1) + ")", result);
      }
      total += lg.loss;
      adam_step(adam, result.params, lg.grad, cfg.lr);
    }
    const double mean = total / static_cast<double>(order.size());
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return result;
}

inline TrainResult train(const KnowledgeGraph& graph, ModelFamily family, Index dim, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
  return train(graph, init_params(family, dim, graph.num_entities(), graph.num_relations(), cfg.seed), cfg,
               on_epoch);
}

}  // namespace kgsheaf
