#include "fedsim/selection.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "fedsim/error.hpp"
#include "fedsim/text.hpp"

namespace fedsim {

ClientRegistry::ClientRegistry(std::vector<LabelCounts> clients) : clients_(std::move(clients)) {
  if (clients_.empty()) throw DomainError("ClientRegistry: no clients");
  num_classes_ = clients_.front().num_classes();
  for (std::size_t k = 0; k < clients_.size(); ++k) {
    const auto& c = clients_[k];
    if (c.num_classes() != num_classes_) {
      throw DimensionError("ClientRegistry: client " + std::to_string(k) + " has " +
                           std::to_string(c.num_classes()) + " classes, expected " +
                           std::to_string(num_classes_));
    }
    if (to_index(c.id()) != k) {
      throw DomainError("ClientRegistry: entry " + std::to_string(k) + " carries id " +
                        std::to_string(to_index(c.id())));
    }
    if (!(c.total() > 0.0)) {
      throw DomainError("ClientRegistry: client " + std::to_string(k) + " has no labels");
    }
  }
}

bool SelectionState::contains(ClientId id) const {
  return std::find(buffer.begin(), buffer.end(), id) != buffer.end();
}

SelectionOutcome select_fedentopt(const ClientRegistry& registry, std::size_t m,
                                  const SelectionState& state, Rng& rng,
                                  const SelectionOptions& options) {
  const std::size_t k = registry.size();
  if (m == 0) throw DomainError("select_fedentopt: cohort size must be positive");
  if (m > k) {
    throw DomainError("select_fedentopt: cohort size " + std::to_string(m) + " exceeds " +
                      std::to_string(k) + " clients");
  }
  if (state.buffer.size() > state.capacity) {
    throw DomainError("select_fedentopt: buffer holds more than its capacity");
  }

  SelectionOutcome out;
  out.state = state;
  auto& buffer = out.state.buffer;

  // Clients buffered when the round starts stay excluded for the whole
  // round, even if evicted by this round's own appends.
  std::vector<char> picked(k, 0);
  std::vector<char> excluded(k, 0);
  for (ClientId id : buffer) excluded.at(to_index(id)) = 1;

  LabelCounts running = LabelCounts::zeros(registry.num_classes());
  std::vector<std::size_t> available;
  available.reserve(k);

  for (std::size_t pick = 0; pick < m; ++pick) {
    auto collect = [&] {
      available.clear();
      for (std::size_t j = 0; j < k; ++j) {
        if (!picked[j] && !excluded[j]) available.push_back(j);
      }
    };
    collect();
    if (available.empty() && options.relax_buffer) {
      while (available.empty() && !buffer.empty()) {
        excluded[to_index(buffer.front())] = 0;
        buffer.pop_front();
        collect();
      }
    }
    if (available.empty()) {
      throw InfeasibleError("select_fedentopt: no client available for pick " +
                            std::to_string(pick) + " (buffer " + std::to_string(buffer.size()) +
                            "/" + std::to_string(state.capacity) + ")");
    }

    std::size_t chosen = 0;
    if (pick == 0) {
      chosen = available[rng.uniform_index(available.size())];
    } else {
      double best = -1.0;
      for (std::size_t j : available) {
        const double h =
            entropy_of_sum_bits(running.counts(), registry.counts(client_id(j)).counts());
        if (h > best + kEntropyTieTolerance) {
          best = h;
          chosen = j;
        }
      }
    }

    if (state.capacity > 0) {
      if (buffer.size() >= state.capacity) buffer.pop_front();
      buffer.push_back(client_id(chosen));
    }
    picked[chosen] = 1;
    running += registry.counts(client_id(chosen));
    out.result.cohort.push_back(client_id(chosen));
    out.result.trace.push_back({client_id(chosen), entropy_bits(normalize(running))});
  }
  out.result.cohort_entropy_bits = out.result.trace.back().entropy_bits;
  return out;
}

SelectionResult select_random(const ClientRegistry& registry, std::size_t m, Rng& rng) {
  const std::size_t k = registry.size();
  if (m == 0) throw DomainError("select_random: cohort size must be positive");
  if (m > k) {
    throw DomainError("select_random: cohort size " + std::to_string(m) + " exceeds " +
                      std::to_string(k) + " clients");
  }
  std::vector<std::size_t> ids(k);
  for (std::size_t j = 0; j < k; ++j) ids[j] = j;

  SelectionResult result;
  LabelCounts running = LabelCounts::zeros(registry.num_classes());
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + rng.uniform_index(k - i);
    std::swap(ids[i], ids[j]);
    const ClientId id = client_id(ids[i]);
    running += registry.counts(id);
    result.cohort.push_back(id);
    result.trace.push_back({id, entropy_bits(normalize(running))});
  }
  result.cohort_entropy_bits = result.trace.back().entropy_bits;
  return result;
}

double cohort_entropy_bits(const ClientRegistry& registry, std::span<const ClientId> cohort) {
  if (cohort.empty()) throw DomainError("cohort_entropy_bits: empty cohort");
  LabelCounts sum = LabelCounts::zeros(registry.num_classes());
  for (ClientId id : cohort) sum += registry.counts(id);
  return entropy_bits(normalize(sum));
}

void write_selection_trace_header(std::ostream& out) {
  out << "round,pick_index,client_id,entropy_bits\n";
}

void append_selection_trace(std::ostream& out, std::size_t round, const SelectionResult& result) {
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    out << round << ',' << i << ',' << to_index(result.trace[i].client) << ','
        << fixed6(result.trace[i].entropy_bits) << '\n';
  }
}

}  // namespace fedsim
