#pragma once

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <span>
#include <vector>

#include "fedsim/labelstats.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

// Entropy differences at or below this many bits count as ties, which go to
// the lower client id. Mathematically equal candidates can differ by a few
// ulps depending on component order.
inline constexpr double kEntropyTieTolerance = 1e-12;

// The server's pre-training knowledge: one label-count vector per client.
// Client k must carry ClientId k and a positive total.
class ClientRegistry {
 public:
  // Throws DomainError for an empty registry, misnumbered ids, or a client
  // with zero total; DimensionError if class counts differ.
  explicit ClientRegistry(std::vector<LabelCounts> clients);

  std::size_t size() const { return clients_.size(); }
  std::size_t num_classes() const { return num_classes_; }
  const LabelCounts& counts(ClientId id) const { return clients_.at(to_index(id)); }
  std::span<const LabelCounts> all() const { return clients_; }

 private:
  std::vector<LabelCounts> clients_;
  std::size_t num_classes_ = 0;
};

// FIFO exclusion buffer of recently selected clients, oldest first.
struct SelectionState {
  std::deque<ClientId> buffer;
  std::size_t capacity = 0;

  bool contains(ClientId id) const;
  friend bool operator==(const SelectionState&, const SelectionState&) = default;
};

struct PickRecord {
  ClientId client;
  double entropy_bits;  // cohort entropy right after this pick
  friend bool operator==(const PickRecord&, const PickRecord&) = default;
};

struct SelectionResult {
  std::vector<ClientId> cohort;  // in pick order
  double cohort_entropy_bits = 0.0;
  std::vector<PickRecord> trace;
  friend bool operator==(const SelectionResult&, const SelectionResult&) = default;
};

struct SelectionOutcome {
  SelectionResult result;
  SelectionState state;
};

struct SelectionOptions {
  // When no candidate is left mid-round, evict the oldest buffer entries
  // (making them selectable) until one becomes available instead of failing.
  bool relax_buffer = false;
};

// Greedy entropy-maximizing selection with a FIFO exclusion buffer.
//
// Clients in the buffer when the call starts are excluded for the whole
// round. The first client is drawn uniformly from the rest; each later pick
// maximizes the entropy of the normalized running label sum over clients
// neither excluded nor already picked, lowest id on ties. Before every
// append the oldest entry is evicted if the buffer is full. With capacity 0
// the buffer stays empty. When capacity <= K - m a candidate always exists.
//
// Throws DomainError if m == 0, m > K or the incoming buffer exceeds its
// capacity; InfeasibleError when a pick has no candidate (unless relaxed).
SelectionOutcome select_fedentopt(const ClientRegistry& registry, std::size_t m,
                                  const SelectionState& state, Rng& rng,
                                  const SelectionOptions& options = {});

// m distinct clients uniformly without replacement. Throws DomainError if
// m == 0 or m > K.
SelectionResult select_random(const ClientRegistry& registry, std::size_t m, Rng& rng);

// Entropy of the normalized summed counts of `cohort`.
double cohort_entropy_bits(const ClientRegistry& registry, std::span<const ClientId> cohort);

// Pick-level trace CSV: "round,pick_index,client_id,entropy_bits".
void write_selection_trace_header(std::ostream& out);
void append_selection_trace(std::ostream& out, std::size_t round, const SelectionResult& result);

}  // namespace fedsim
