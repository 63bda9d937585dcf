#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedsim/labelstats.hpp"
#include "fedsim/model.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

struct TrainConfig {
  std::size_t local_epochs = 5;
  std::size_t batch_size = 64;
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double lr_decay_per_round = 0.98;
  std::size_t rounds = 100;
  std::size_t cohort_size = 10;
  std::uint64_t seed = 0;

  // Throws ConfigError on non-positive counts, negative rates, or a decay
  // outside (0, 1].
  void validate() const;
  // lr * lr_decay_per_round^round, rounds counted from 0.
  double round_lr(std::size_t round) const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Mini-batch SGD with heavy-ball momentum and L2 weight decay:
//   v <- momentum * v + (grad + weight_decay * w);  w <- w - lr * v
// Momentum starts at zero on every call. Each epoch visits the rows in a
// fresh shuffle drawn from `rng`; the last partial batch is kept.
// Throws DomainError on an empty dataset or negative lr, NumericalError if a
// parameter becomes non-finite.
ModelParams local_train(const ModelSpec& spec, const ModelParams& global, const Dataset& data,
                        const TrainConfig& cfg, double round_lr, Rng& rng);

struct ClientUpdate {
  ClientId client;
  ModelParams params;
  std::size_t num_samples = 0;
};

// Sample-count weighted mean of the updates, accumulated in ascending client
// id as a running mean so identical inputs reproduce themselves exactly.
// Throws DomainError on no updates or zero total weight, DimensionError on
// mismatched parameter lengths.
ModelParams aggregate_params(std::span<const ClientUpdate> updates);

struct RoundMetrics {
  std::size_t round = 0;
  std::string selector;
  std::vector<ClientId> cohort;
  double entropy_bits = 0.0;       // from the counts selection saw
  double entropy_true_bits = 0.0;  // from the true counts, evaluation only
  double test_accuracy = 0.0;
  double test_loss = 0.0;
  double lr = 0.0;
  friend bool operator==(const RoundMetrics&, const RoundMetrics&) = default;
};

}  // namespace fedsim
