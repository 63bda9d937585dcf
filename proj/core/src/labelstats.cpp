#include "fedsim/labelstats.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "fedsim/error.hpp"

namespace fedsim {
namespace {

double plogp_bits(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

}  // namespace

LabelCounts::LabelCounts(std::vector<double> counts, ClientId id)
    : counts_(std::move(counts)), id_(id) {
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (!std::isfinite(counts_[i]) || counts_[i] < 0.0) {
      throw DomainError("LabelCounts: component " + std::to_string(i) +
                        " is negative or non-finite");
    }
  }
}

LabelCounts LabelCounts::zeros(std::size_t num_classes, ClientId id) {
  return LabelCounts(std::vector<double>(num_classes, 0.0), id);
}

double LabelCounts::total() const { return std::accumulate(counts_.begin(), counts_.end(), 0.0); }

LabelCounts& LabelCounts::operator+=(const LabelCounts& other) {
  if (other.counts_.size() != counts_.size()) {
    throw DimensionError("LabelCounts: adding " + std::to_string(other.counts_.size()) +
                         " classes to " + std::to_string(counts_.size()));
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

LabelDistribution::LabelDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("LabelDistribution: component outside [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance) {
    throw DomainError("LabelDistribution: components sum to " + std::to_string(sum));
  }
}

LabelDistribution LabelDistribution::uniform(std::size_t num_classes) {
  if (num_classes == 0) throw DomainError("LabelDistribution::uniform: no classes");
  return LabelDistribution(
      std::vector<double>(num_classes, 1.0 / static_cast<double>(num_classes)));
}

LabelDistribution normalize(const LabelCounts& counts) {
  const double total = counts.total();
  if (!(total > 0.0)) throw ZeroMassError("normalize: label counts have zero total");
  std::vector<double> probs(counts.num_classes());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = counts[i] / total;
  return LabelDistribution(std::move(probs));
}

double entropy_bits(const LabelDistribution& dist) {
  double h = 0.0;
  for (double p : dist.probs()) h -= plogp_bits(p);
  // -0.0 for degenerate distributions reads badly in CSV output.
  return h > 0.0 ? h : 0.0;
}

LabelCounts aggregate_counts(std::span<const LabelCounts> cohort) {
  if (cohort.empty()) throw DomainError("aggregate_counts: empty cohort");
  LabelCounts sum = cohort.front();
  for (std::size_t i = 1; i < cohort.size(); ++i) sum += cohort[i];
  return sum;
}

double all_labels_present_threshold(std::size_t num_classes) {
  if (num_classes < 2) throw DomainError("all_labels_present_threshold: need at least 2 classes");
  return std::log2(static_cast<double>(num_classes - 1));
}

double entropy_of_sum_bits(std::span<const double> base, std::span<const double> extra) {
  if (base.size() != extra.size()) throw DimensionError("entropy_of_sum_bits: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) total += base[i] + extra[i];
  if (!(total > 0.0)) throw ZeroMassError("entropy_of_sum_bits: zero total");
  double h = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) h -= plogp_bits((base[i] + extra[i]) / total);
  return h > 0.0 ? h : 0.0;
}

}  // namespace fedsim
