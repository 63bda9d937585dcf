#include "fedsim/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedsim/error.hpp"

namespace fedsim {

void TrainConfig::validate() const {
  if (local_epochs == 0) throw ConfigError("train: epochs must be positive");
  if (batch_size == 0) throw ConfigError("train: batch size must be positive");
  if (rounds == 0) throw ConfigError("train: rounds must be positive");
  if (cohort_size == 0) throw ConfigError("train: cohort size must be positive");
  if (!(lr > 0.0)) throw ConfigError("train: lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("train: weight decay must be >= 0");
  if (!(lr_decay_per_round > 0.0 && lr_decay_per_round <= 1.0)) {
    throw ConfigError("train: lr decay must be in (0, 1]");
  }
}

double TrainConfig::round_lr(std::size_t round) const {
  return lr * std::pow(lr_decay_per_round, static_cast<double>(round));
}

ModelParams local_train(const ModelSpec& spec, const ModelParams& global, const Dataset& data,
                        const TrainConfig& cfg, double round_lr, Rng& rng) {
  if (data.empty()) throw DomainError("local_train: empty dataset");
  if (!(round_lr >= 0.0)) throw DomainError("local_train: lr must be >= 0");
  if (cfg.batch_size == 0) throw DomainError("local_train: batch size must be positive");

  ModelParams w = global;
  std::vector<double> velocity(w.values.size(), 0.0);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t start = 0, batch = 0; start < order.size(); start += cfg.batch_size, ++batch) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      const auto rows = std::span<const std::size_t>(order).subspan(start, len);
      LossGrad lg;
      try {
        lg = forward_loss_grad(spec, w, data, rows);
      } catch (const NumericalError& e) {
        rethrow_with_context(e, "epoch " + std::to_string(epoch) + " batch " +
                                    std::to_string(batch));
      }
      for (std::size_t i = 0; i < w.values.size(); ++i) {
        velocity[i] = cfg.momentum * velocity[i] + (lg.grad[i] + cfg.weight_decay * w.values[i]);
        w.values[i] -= round_lr * velocity[i];
      }
      if (!w.all_finite()) {
        throw NumericalError("local_train: parameters diverged at epoch " +
                             std::to_string(epoch) + " batch " + std::to_string(batch));
      }
    }
  }
  return w;
}

ModelParams aggregate_params(std::span<const ClientUpdate> updates) {
  if (updates.empty()) throw DomainError("aggregate_params: no updates");
  const std::size_t p = updates.front().params.values.size();
  for (const auto& u : updates) {
    if (u.params.values.size() != p) {
      throw DimensionError("aggregate_params: client " + std::to_string(to_index(u.client)) +
                           " sent " + std::to_string(u.params.values.size()) +
                           " parameters, expected " + std::to_string(p));
    }
  }
  std::vector<std::size_t> order(updates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return to_index(updates[a].client) < to_index(updates[b].client);
  });

  ModelParams mean;
  double seen = 0.0;
  for (std::size_t idx : order) {
    const auto& u = updates[idx];
    if (u.num_samples == 0) continue;
    const double n = static_cast<double>(u.num_samples);
    if (seen == 0.0) {
      mean = u.params;
      seen = n;
      continue;
    }
    seen += n;
    const double share = n / seen;
    for (std::size_t i = 0; i < p; ++i) {
      mean.values[i] += share * (u.params.values[i] - mean.values[i]);
    }
  }
  if (seen == 0.0) throw DomainError("aggregate_params: total sample count is zero");
  return mean;
}

}  // namespace fedsim
