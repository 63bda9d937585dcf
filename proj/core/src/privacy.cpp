#include "fedsim/privacy.hpp"

#include <cmath>
#include <string>

#include "fedsim/error.hpp"

namespace fedsim {

PrivacyBudget::PrivacyBudget(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("PrivacyBudget: epsilon must be positive, got " + std::to_string(epsilon));
  }
}

double laplace_from_centered_uniform(double scale, double u_centered) {
  if (u_centered == 0.0) return 0.0;
  const double sign = u_centered < 0.0 ? -1.0 : 1.0;
  return -scale * sign * std::log1p(-2.0 * std::abs(u_centered));
}

double laplace_sample(double scale, Rng& rng) {
  if (!(scale > 0.0)) throw DomainError("laplace_sample: scale must be positive");
  return laplace_from_centered_uniform(scale, rng.uniform_open() - 0.5);
}

std::vector<double> privatize_counts_raw(const LabelCounts& counts, const PrivacyBudget& budget,
                                         Rng& rng) {
  std::vector<double> noised(counts.num_classes());
  for (std::size_t i = 0; i < noised.size(); ++i) {
    noised[i] = counts[i] + laplace_sample(budget.laplace_scale(), rng);
  }
  return noised;
}

LabelCounts privatize_counts(const LabelCounts& counts, const PrivacyBudget& budget, Rng& rng) {
  auto noised = privatize_counts_raw(counts, budget, rng);
  bool any_positive = false;
  for (auto& v : noised) {
    if (v < 0.0) v = 0.0;
    any_positive = any_positive || v > 0.0;
  }
  if (!any_positive) noised.assign(noised.size(), 1.0);
  return LabelCounts(std::move(noised), counts.id());
}

}  // namespace fedsim
