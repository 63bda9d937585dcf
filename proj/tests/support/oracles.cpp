#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedsim/error.hpp"

namespace fedsim::testing {
namespace {

double entropy_direct(std::span<const double> counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / total) * std::log2(c / total);
  }
  return h;
}

}  // namespace

ClientId greedy_step_oracle(const ClientRegistry& registry, const std::set<ClientId>& picked,
                            const std::set<ClientId>& excluded, const LabelCounts& running) {
  bool found = false;
  double best = 0.0;
  ClientId best_id{};
  for (std::size_t j = 0; j < registry.size(); ++j) {
    const ClientId id = client_id(j);
    if (picked.contains(id) || excluded.contains(id)) continue;
    std::vector<double> sum(running.counts().begin(), running.counts().end());
    for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += registry.counts(id)[c];
    const double h = entropy_direct(sum);
    if (!found || h > best + kEntropyTieTolerance) {
      found = true;
      best = h;
      best_id = id;
    }
  }
  if (!found) throw InfeasibleError("greedy_step_oracle: no candidate");
  return best_id;
}

std::vector<ClientId> greedy_round_oracle(const ClientRegistry& registry, std::size_t m,
                                          std::vector<ClientId> buffer, std::size_t capacity,
                                          ClientId first_pick) {
  std::vector<ClientId> cohort;
  std::set<ClientId> picked;
  LabelCounts running = LabelCounts::zeros(registry.num_classes());
  const std::set<ClientId> excluded(buffer.begin(), buffer.end());
  for (std::size_t i = 0; i < m; ++i) {
    const ClientId pick = i == 0 ? first_pick : greedy_step_oracle(registry, picked, excluded, running);
    if (capacity > 0) {
      if (buffer.size() >= capacity) buffer.erase(buffer.begin());
      buffer.push_back(pick);
    }
    picked.insert(pick);
    running += registry.counts(pick);
    cohort.push_back(pick);
  }
  return cohort;
}

double reference_loss(const ModelSpec& spec, const ModelParams& params, const Dataset& data,
                      std::span<const std::size_t> rows) {
  const auto& v = params.values;
  const std::size_t d = spec.input_dim;
  const std::size_t c_out = spec.num_classes;
  long double total = 0.0L;
  for (std::size_t r : rows) {
    const auto x = data.row(r);
    std::vector<long double> input(x.begin(), x.end());
    std::size_t offset = 0;
    if (spec.kind == ModelKind::kMlp) {
      const std::size_t h = spec.hidden;
      std::vector<long double> act(h);
      for (std::size_t j = 0; j < h; ++j) {
        long double z = v[h * d + j];
        for (std::size_t i = 0; i < d; ++i) z += v[j * d + i] * input[i];
        act[j] = z > 0 ? z : 0;
      }
      input = std::move(act);
      offset = h * d + h;
    }
    const std::size_t in = input.size();
    std::vector<long double> z(c_out);
    for (std::size_t k = 0; k < c_out; ++k) {
      long double acc = v[offset + c_out * in + k];
      for (std::size_t i = 0; i < in; ++i) acc += v[offset + k * in + i] * input[i];
      z[k] = acc;
    }
    const long double peak = *std::max_element(z.begin(), z.end());
    long double sum = 0.0L;
    for (auto zk : z) sum += std::exp(zk - peak);
    total += peak + std::log(sum) - z[data.label(r)];
  }
  return static_cast<double>(total / static_cast<long double>(rows.size()));
}

std::vector<double> finite_difference_grad(const ModelSpec& spec, const ModelParams& params,
                                           const Dataset& data, std::span<const std::size_t> rows,
                                           double step) {
  std::vector<double> grad(params.values.size());
  ModelParams probe = params;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double orig = probe.values[i];
    probe.values[i] = orig + step;
    const double up = reference_loss(spec, probe, data, rows);
    probe.values[i] = orig - step;
    const double down = reference_loss(spec, probe, data, rows);
    probe.values[i] = orig;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

ModelParams centralized_sgd(const ModelSpec& spec, ModelParams params, const Dataset& data,
                            const TrainConfig& cfg, std::size_t rounds, std::uint64_t seed) {
  std::vector<std::size_t> order(data.size());
  for (std::size_t t = 0; t < rounds; ++t) {
    const double lr = cfg.lr * std::pow(cfg.lr_decay_per_round, static_cast<double>(t));
    Rng rng = Rng::stream(seed, StreamPurpose::kLocalTrain, t, 0);
    std::vector<double> velocity(params.values.size(), 0.0);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      const auto g = forward_loss_grad(spec, params, data,
                                       std::span<const std::size_t>(order).subspan(start, len));
      for (std::size_t i = 0; i < params.values.size(); ++i) {
        velocity[i] = cfg.momentum * velocity[i] + (g.grad[i] + cfg.weight_decay * params.values[i]);
        params.values[i] -= lr * velocity[i];
      }
    }
  }
  return params;
}

std::vector<double> histogram(std::span<const Label> labels, std::size_t num_classes) {
  std::vector<double> h(num_classes, 0.0);
  for (Label l : labels) h.at(l) += 1.0;
  return h;
}

double laplace_cdf(double x, double scale) {
  return x < 0.0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

ClientRegistry random_registry(std::size_t num_clients, std::size_t num_classes, Rng& rng) {
  std::vector<LabelCounts> clients;
  for (std::size_t k = 0; k < num_clients; ++k) {
    std::vector<double> counts(num_classes, 0.0);
    const std::size_t support = 1 + rng.uniform_index(num_classes);
    for (std::size_t s = 0; s < support; ++s) {
      counts[rng.uniform_index(num_classes)] += static_cast<double>(1 + rng.uniform_index(20));
    }
    clients.emplace_back(std::move(counts), client_id(k));
  }
  return ClientRegistry(std::move(clients));
}

}  // namespace fedsim::testing
