#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "fedsim/labelstats.hpp"

namespace fedsim {

using Label = std::uint32_t;

// Each client holds samples of exactly `labels_per_client` distinct classes.
struct QuantitySkew {
  std::size_t labels_per_client = 2;
  friend bool operator==(const QuantitySkew&, const QuantitySkew&) = default;
};

// Per-class client proportions drawn from a symmetric Dirichlet(beta).
struct DirichletSkew {
  double beta = 0.5;
  friend bool operator==(const DirichletSkew&, const DirichletSkew&) = default;
};

using SkewKind = std::variant<QuantitySkew, DirichletSkew>;

struct PartitionSpec {
  SkewKind kind = QuantitySkew{};
  std::size_t num_clients = 1;
  std::uint64_t seed = 0;
  friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;
};

// Sample indices into the pooled dataset, one list per client. A valid
// partition is disjoint, exhaustive and has no empty client.
struct Partition {
  std::vector<std::vector<std::size_t>> assignment;

  std::size_t num_clients() const { return assignment.size(); }
  friend bool operator==(const Partition&, const Partition&) = default;
};

// Quantity-based label skew. Clients are visited in a seeded shuffled order;
// the client at position p takes classes (p*j + t) mod C for t < j, so every
// class is covered before any repeats. A class's shuffled samples are split
// evenly among its holders in ascending client id, remainder one per client
// starting from the lowest id.
//
// Throws DomainError unless 1 <= j <= C and K >= 1, InfeasibleError if
// j*K < C or a class has fewer samples than holders, EmptyClassError if a
// class has no samples.
Partition partition_quantity(std::span<const Label> labels, std::size_t num_classes,
                             std::size_t num_clients, std::size_t labels_per_client,
                             std::uint64_t seed);

// Distribution-based label skew. For each class draw p ~ Dir_K(beta) from the
// class's own stream, round p * n_class to integers by largest remainder (ties
// to the lower client id), and hand out contiguous blocks of the class's
// shuffled samples in client order. Clients left empty then receive one
// sample from the currently largest client until none is empty.
//
// Throws DomainError for beta <= 0 or K == 0, EmptyClassError for an empty
// class, InfeasibleError if there are fewer samples than clients.
Partition partition_dirichlet(std::span<const Label> labels, std::size_t num_classes,
                              std::size_t num_clients, double beta, std::uint64_t seed);

// Dispatches on spec.kind.
Partition make_partition(std::span<const Label> labels, std::size_t num_classes,
                         const PartitionSpec& spec);

// Per-client label histograms; client k gets ClientId k.
std::vector<LabelCounts> counts_from_partition(const Partition& partition,
                                               std::span<const Label> labels,
                                               std::size_t num_classes);

// Largest-remainder rounding of `proportions` (summing to ~1) to integers
// summing exactly to `total`. Ties in the remainder go to the lower index.
std::vector<std::size_t> largest_remainder_counts(std::span<const double> proportions,
                                                  std::size_t total);

// Text format: one line per client, "client_id<TAB>i0,i1,...".
void write_partition(std::ostream& out, const Partition& partition);
// Throws FormatError on malformed lines or out-of-order client ids.
Partition read_partition(std::istream& in);

}  // namespace fedsim
