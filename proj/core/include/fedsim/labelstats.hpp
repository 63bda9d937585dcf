#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fedsim {

// Opaque client identifier. Registries index clients densely from 0.
enum class ClientId : std::uint32_t {};

constexpr std::size_t to_index(ClientId id) { return static_cast<std::size_t>(id); }
constexpr ClientId client_id(std::size_t index) { return static_cast<ClientId>(index); }

// Absolute tolerance on "sums to one" for label distributions.
inline constexpr double kDistributionTolerance = 1e-9;

// Per-client histogram of label occurrences. Components are real-valued so
// that noised (differentially private) counts share the same type.
class LabelCounts {
 public:
  LabelCounts() = default;
  // Throws DomainError on a negative or non-finite component.
  explicit LabelCounts(std::vector<double> counts, ClientId id = ClientId{0});

  static LabelCounts zeros(std::size_t num_classes, ClientId id = ClientId{0});

  std::size_t num_classes() const { return counts_.size(); }
  std::span<const double> counts() const { return counts_; }
  double operator[](std::size_t label) const { return counts_[label]; }
  ClientId id() const { return id_; }
  double total() const;

  // Component-wise accumulation; throws DimensionError on length mismatch.
  LabelCounts& operator+=(const LabelCounts& other);

  friend bool operator==(const LabelCounts&, const LabelCounts&) = default;

 private:
  std::vector<double> counts_;
  ClientId id_{0};
};

// Probability vector over labels; components in [0, 1] summing to one.
class LabelDistribution {
 public:
  // Throws DomainError if `probs` is not a distribution within tolerance.
  explicit LabelDistribution(std::vector<double> probs);

  static LabelDistribution uniform(std::size_t num_classes);

  std::size_t num_classes() const { return probs_.size(); }
  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t label) const { return probs_[label]; }

 private:
  std::vector<double> probs_;
};

// counts / sum(counts). Throws ZeroMassError if the total is zero.
LabelDistribution normalize(const LabelCounts& counts);

// Shannon entropy in bits, with 0 * log2(0) taken as 0.
double entropy_bits(const LabelDistribution& dist);

// Component-wise sum of a non-empty cohort. The result's id is that of the
// first member. Throws DomainError when empty, DimensionError on mismatch.
LabelCounts aggregate_counts(std::span<const LabelCounts> cohort);

// log2(C - 1): any distribution over C classes with entropy strictly above
// this has every class present. Throws DomainError for C < 2.
double all_labels_present_threshold(std::size_t num_classes);

// Entropy in bits of normalize(base + extra) without materializing the sum.
// Used by the greedy selection scan; `base` and `extra` must have equal
// length and a positive combined total.
double entropy_of_sum_bits(std::span<const double> base, std::span<const double> extra);

}  // namespace fedsim
